// igcurv — command-line front end for the dual-connection tensor engine.
//
// Subcommands:
//   verify       run the identity registry on a manifold, emit a report
//   compute      evaluate one tensor at one chart point (JSON)
//   table        evaluate one tensor over a coordinate grid (CSV)
//   convergence  step-size sweep of one identity with an order fit (JSON)
//
// Exit codes: 0 success; 1 an identity check failed (report still emitted);
// 2 malformed input, unknown names, or domain escapes.

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "igcurv/chart.hpp"
#include "igcurv/connections.hpp"
#include "igcurv/curvature.hpp"
#include "igcurv/einstein.hpp"
#include "igcurv/types.hpp"
#include "igcurv/verify.hpp"
#include "igcurv/zoo.hpp"

namespace {

using igcurv::ChartPoint;
using igcurv::Conn;
using igcurv::GeometryBundle;
using igcurv::GeometryJet;
using igcurv::Tensor;

std::string fmt17(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string fmt9(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.9g", v);
  return b;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char b[8];
          std::snprintf(b, sizeof b, "\\u%04x", c);
          out += b;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t pos = std::string::npos;
  double v = 0.0;
  if (!s.empty()) {
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
  }
  if (pos != s.size()) {
    throw igcurv::ParseError(std::string("malformed ") + what + " '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, const char* what) {
  std::size_t pos = std::string::npos;
  long v = 0;
  if (!s.empty()) {
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
  }
  if (pos != s.size()) {
    throw igcurv::ParseError(std::string("malformed ") + what + " '" + s + "'");
  }
  return v;
}

ChartPoint parse_point(const std::string& s, int dim) {
  const std::vector<std::string> parts = split(s, ',');
  if (static_cast<int>(parts.size()) != dim) {
    throw igcurv::ValidationError(
        "expected " + std::to_string(dim) + " coordinates, got " +
        std::to_string(parts.size()) + " in '" + s + "'");
  }
  ChartPoint p;
  p.reserve(parts.size());
  for (const std::string& t : parts) p.push_back(parse_double(t, "coordinate"));
  return p;
}

Conn conn_of(const std::string& name) {
  if (name == "primal") return Conn::primal;
  if (name == "dual") return Conn::dual;
  if (name == "average") return Conn::average;
  return Conn::levi_civita;
}

struct TensorChoice {
  int rank = 0;
  bool uses_conn = false;
  bool uses_alpha = false;
};

TensorChoice tensor_info(const std::string& t) {
  if (t == "riemann") return {4, true, false};
  if (t == "ricci") return {2, true, false};
  if (t == "scalar") return {0, true, false};
  if (t == "einstein") return {2, true, false};
  if (t == "alpha_einstein") return {2, false, true};
  if (t == "H") return {2, false, false};
  if (t == "K" || t == "C" || t == "T" || t == "T_star") return {3, false, false};
  throw igcurv::UnknownName("unknown tensor '" + t + "'");
}

Tensor eval_tensor(const GeometryBundle& b, const std::string& tensor, Conn conn,
                   double alpha, const ChartPoint& p, double h) {
  GeometryJet jet(b, p, h);
  if (tensor == "riemann") return jet.riemann_of(conn);
  if (tensor == "ricci") return jet.ricci_of(conn);
  if (tensor == "scalar") return Tensor::scalar(jet.scalar_of(conn));
  if (tensor == "einstein") return igcurv::einstein_from_jet(jet, conn).G;
  if (tensor == "alpha_einstein") return igcurv::alpha_einstein_blend(jet, alpha).G;
  if (tensor == "K") return jet.K;
  if (tensor == "C") return jet.C;
  if (tensor == "T") return jet.T;
  if (tensor == "T_star") return jet.Tstar;
  return igcurv::h_tensor(jet).H;  // "H"
}

/// Visit index tuples of a rank/dim tensor in lexicographic order.
template <typename Fn>
void for_each_index(int rank, int dim, Fn&& fn) {
  std::array<int, 4> idx{0, 0, 0, 0};
  if (rank == 0) {
    fn(idx);
    return;
  }
  while (true) {
    fn(idx);
    int slot = rank - 1;
    while (slot >= 0) {
      if (++idx[static_cast<std::size_t>(slot)] < dim) break;
      idx[static_cast<std::size_t>(slot)] = 0;
      --slot;
    }
    if (slot < 0) return;
  }
}

double component_at(const Tensor& t, const std::array<int, 4>& idx) {
  switch (t.rank()) {
    case 0: return t();
    case 1: return t(idx[0]);
    case 2: return t(idx[0], idx[1]);
    case 3: return t(idx[0], idx[1], idx[2]);
    default: return t(idx[0], idx[1], idx[2], idx[3]);
  }
}

std::string index_label(int rank, const std::array<int, 4>& idx) {
  std::string out;
  for (int s = 0; s < rank; ++s) {
    if (s) out += ",";
    out += std::to_string(idx[static_cast<std::size_t>(s)] + 1);
  }
  return out;
}

void emit_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw igcurv::ParseError("cannot open output file '" + out_path + "'");
  f << text;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string manifold;
  int points = 20;
  std::uint64_t seed = 20240801;
  double h = 0.0;
  int threads = 1;
  bool as_json = false;  // default; flag exists so scripts can be explicit
  bool as_csv = false;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  const GeometryBundle bundle = igcurv::manifold_by_name(a.manifold);
  igcurv::VerifyOptions opt;
  opt.points = a.points;
  opt.seed = a.seed;
  opt.base_h = a.h;
  opt.threads = a.threads;
  const igcurv::VerifyReport rep = igcurv::run_verify(bundle, opt);
  emit_output(a.as_csv ? igcurv::report_to_csv(rep) : igcurv::report_to_json(rep),
              a.out);
  return rep.all_pass() ? 0 : 1;
}

struct ComputeArgs {
  std::string manifold;
  std::string tensor;
  std::string conn = "primal";
  double alpha = 0.0;
  std::string at;
  double h = 0.0;
  std::string out;
};

int cmd_compute(const ComputeArgs& a) {
  const GeometryBundle bundle = igcurv::manifold_by_name(a.manifold);
  const TensorChoice info = tensor_info(a.tensor);
  const ChartPoint p = parse_point(a.at, bundle.dim);
  const Tensor t = eval_tensor(bundle, a.tensor, conn_of(a.conn), a.alpha, p, a.h);

  std::ostringstream os;
  os << "{\n";
  os << "  \"manifold\": \"" << json_escape(bundle.name) << "\",\n";
  os << "  \"tensor\": \"" << a.tensor << "\",\n";
  if (info.uses_conn) os << "  \"connection\": \"" << a.conn << "\",\n";
  if (info.uses_alpha) os << "  \"alpha\": " << fmt17(a.alpha) << ",\n";
  os << "  \"at\": [";
  for (std::size_t i = 0; i < p.size(); ++i) {
    os << (i ? ", " : "") << fmt17(p[i]);
  }
  os << "],\n";
  os << "  \"slots\": [";
  for (int s = 0; s < t.rank(); ++s) {
    os << (s ? ", " : "") << "\""
       << (t.variance(s) == igcurv::Variance::upper ? "upper" : "lower") << "\"";
  }
  os << "],\n";
  os << "  \"components\": {";
  bool first = true;
  for_each_index(t.rank(), bundle.dim, [&](const std::array<int, 4>& idx) {
    os << (first ? "" : ", ") << "\"" << index_label(t.rank(), idx)
       << "\": " << fmt17(component_at(t, idx));
    first = false;
  });
  os << "}\n";
  os << "}\n";
  emit_output(os.str(), a.out);
  return 0;
}

struct TableArgs {
  std::string manifold;
  std::string tensor;
  std::string conn = "primal";
  double alpha = 0.0;
  std::string grid;
  double h = 0.0;
  bool as_csv = false;  // tables are always CSV; flag accepted for symmetry
  std::string out;
};

std::vector<std::vector<double>> parse_grid(const std::string& spec, int dim) {
  const std::vector<std::string> axes = split(spec, ',');
  if (static_cast<int>(axes.size()) != dim) {
    throw igcurv::ValidationError("grid must give " + std::to_string(dim) +
                                  " axis specs, got " +
                                  std::to_string(axes.size()));
  }
  std::vector<std::vector<double>> out;
  out.reserve(axes.size());
  for (const std::string& axis : axes) {
    const std::vector<std::string> f = split(axis, ':');
    std::vector<double> vals;
    if (f.size() == 1) {
      vals.push_back(parse_double(f[0], "grid value"));
    } else if (f.size() == 3) {
      const double lo = parse_double(f[0], "grid bound");
      const double hi = parse_double(f[1], "grid bound");
      const long n = parse_long(f[2], "grid count");
      if (n < 1) throw igcurv::ValidationError("grid count must be >= 1 in '" + axis + "'");
      if (n == 1) {
        vals.push_back(lo);
      } else {
        for (long k = 0; k < n; ++k) {
          vals.push_back(lo + (hi - lo) * static_cast<double>(k) /
                                  static_cast<double>(n - 1));
        }
      }
    } else {
      throw igcurv::ValidationError("grid axis must be 'value' or 'lo:hi:n', got '" +
                                    axis + "'");
    }
    out.push_back(std::move(vals));
  }
  return out;
}

int cmd_table(const TableArgs& a) {
  const GeometryBundle bundle = igcurv::manifold_by_name(a.manifold);
  const TensorChoice info = tensor_info(a.tensor);
  const std::vector<std::vector<double>> axes = parse_grid(a.grid, bundle.dim);
  const Conn conn = conn_of(a.conn);

  std::ostringstream os;
  for (int i = 0; i < bundle.dim; ++i) os << (i ? "," : "") << "x" << (i + 1);
  for (int s = 0; s < info.rank; ++s) os << ",i" << (s + 1);
  os << ",value\n";

  std::vector<std::size_t> cursor(axes.size(), 0);
  while (true) {
    ChartPoint p(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) p[i] = axes[i][cursor[i]];
    const Tensor t = eval_tensor(bundle, a.tensor, conn, a.alpha, p, a.h);
    std::ostringstream coords;
    for (std::size_t i = 0; i < p.size(); ++i) {
      coords << (i ? "," : "") << fmt9(p[i]);
    }
    for_each_index(t.rank(), bundle.dim, [&](const std::array<int, 4>& idx) {
      os << coords.str();
      for (int s = 0; s < t.rank(); ++s) {
        os << "," << (idx[static_cast<std::size_t>(s)] + 1);
      }
      os << "," << fmt9(component_at(t, idx)) << "\n";
    });
    // lexicographic odometer: last axis fastest
    int axis = static_cast<int>(axes.size()) - 1;
    while (axis >= 0) {
      if (++cursor[static_cast<std::size_t>(axis)] <
          axes[static_cast<std::size_t>(axis)].size()) {
        break;
      }
      cursor[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  emit_output(os.str(), a.out);
  return 0;
}

struct ConvergenceArgs {
  std::string manifold;
  std::string identity;
  std::string sweep;
  int points = 20;
  std::uint64_t seed = 20240801;
  std::string out;
};

int cmd_convergence(const ConvergenceArgs& a) {
  const GeometryBundle bundle = igcurv::manifold_by_name(a.manifold);
  std::vector<double> steps;
  for (const std::string& t : split(a.sweep, ',')) {
    steps.push_back(parse_double(t, "h-sweep entry"));
  }
  igcurv::VerifyOptions opt;
  opt.points = a.points;
  opt.seed = a.seed;
  const igcurv::ConvergenceReport rep =
      igcurv::run_convergence(bundle, a.identity, steps, opt);

  std::ostringstream os;
  os << "{\n";
  os << "  \"id\": \"" << json_escape(rep.id) << "\",\n";
  os << "  \"manifold\": \"" << json_escape(bundle.name) << "\",\n";
  os << "  \"class\": \"" << igcurv::to_string(rep.tol_class) << "\",\n";
  os << "  \"steps\": [";
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    os << (i ? ", " : "") << fmt17(rep.steps[i]);
  }
  os << "],\n";
  os << "  \"residuals\": [";
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    os << (i ? ", " : "") << fmt17(rep.residuals[i]);
  }
  os << "],\n";
  os << "  \"fitted_order\": " << fmt17(rep.fitted_order) << ",\n";
  os << "  \"plateau\": " << (rep.plateau ? "true" : "false") << ",\n";
  os << "  \"pass\": " << (rep.pass ? "true" : "false") << "\n";
  os << "}\n";
  emit_output(os.str(), a.out);
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-connection tensor calculus and identity verification"};
  // Free the short -h so --h can name the finite-difference step.
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  const std::vector<std::string> tensor_names = {
      "riemann", "ricci", "scalar", "einstein", "alpha_einstein",
      "K",       "C",     "T",      "T_star",   "H"};
  const std::vector<std::string> conn_names = {"primal", "dual", "average",
                                               "levi_civita"};

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "run the identity registry");
  verify->set_help_flag("--help", "print help and exit");
  verify->add_option("spec,--manifold", va.manifold,
                     "manifold name or JSON spec path")
      ->required();
  verify->add_option("--points", va.points, "sample point count")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", va.seed, "sampling seed");
  verify->add_option("--h", va.h, "finite-difference base step")
      ->check(CLI::PositiveNumber);
  verify->add_option("--threads", va.threads, "worker threads over points")
      ->check(CLI::PositiveNumber);
  CLI::Option* vjson = verify->add_flag("--json", va.as_json, "JSON report (default)");
  CLI::Option* vcsv = verify->add_flag("--csv", va.as_csv, "CSV report");
  vjson->excludes(vcsv);
  vcsv->excludes(vjson);
  verify->add_option("--out", va.out, "write the report to a file");

  ComputeArgs ca;
  CLI::App* compute =
      app.add_subcommand("compute", "evaluate one tensor at a chart point");
  compute->set_help_flag("--help", "print help and exit");
  compute->add_option("spec,--manifold", ca.manifold,
                      "manifold name or JSON spec path")
      ->required();
  compute->add_option("--tensor", ca.tensor, "tensor to evaluate")
      ->required()
      ->check(CLI::IsMember(tensor_names));
  compute->add_option("--conn", ca.conn, "connection for curvature tensors")
      ->check(CLI::IsMember(conn_names));
  compute->add_option("--alpha", ca.alpha, "alpha for alpha_einstein");
  compute->add_option("--at", ca.at, "comma-separated chart coordinates")
      ->required();
  compute->add_option("--h", ca.h, "finite-difference base step")
      ->check(CLI::PositiveNumber);
  compute->add_option("--out", ca.out, "write the JSON to a file");

  TableArgs ta;
  CLI::App* table =
      app.add_subcommand("table", "evaluate one tensor over a coordinate grid");
  table->set_help_flag("--help", "print help and exit");
  table->add_option("spec,--manifold", ta.manifold,
                    "manifold name or JSON spec path")
      ->required();
  table->add_option("--tensor", ta.tensor, "tensor to evaluate")
      ->required()
      ->check(CLI::IsMember(tensor_names));
  table->add_option("--conn", ta.conn, "connection for curvature tensors")
      ->check(CLI::IsMember(conn_names));
  table->add_option("--alpha", ta.alpha, "alpha for alpha_einstein");
  table->add_option("--grid", ta.grid,
                    "per-axis 'lo:hi:n' or fixed 'value', comma-separated")
      ->required();
  table->add_option("--h", ta.h, "finite-difference base step")
      ->check(CLI::PositiveNumber);
  table->add_flag("--csv", ta.as_csv, "CSV output (the only table format)");
  table->add_option("--out", ta.out, "write the CSV to a file");

  ConvergenceArgs ga;
  CLI::App* convergence =
      app.add_subcommand("convergence", "step-size sweep of one identity");
  convergence->set_help_flag("--help", "print help and exit");
  convergence
      ->add_option("spec,--manifold", ga.manifold,
                   "manifold name or JSON spec path")
      ->required();
  convergence->add_option("--identity", ga.identity, "registered identity id")
      ->required();
  convergence
      ->add_option("--h-sweep", ga.sweep,
                   "comma-separated positive decreasing steps")
      ->required();
  convergence->add_option("--points", ga.points, "sample point count")
      ->check(CLI::PositiveNumber);
  convergence->add_option("--seed", ga.seed, "sampling seed");
  convergence->add_option("--out", ga.out, "write the JSON to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(va);
    if (compute->parsed()) return cmd_compute(ca);
    if (table->parsed()) return cmd_table(ta);
    if (convergence->parsed()) return cmd_convergence(ga);
  } catch (const igcurv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
