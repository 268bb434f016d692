#pragma once

// Brute-force reference evaluators for the test suite. Everything here is an
// independent transcription of the tensor conventions with explicit loops —
// it deliberately does NOT call the library's component routines, so library
// results can be cross-checked against a second implementation. These
// definitions are frozen; if a library function disagrees with them, the
// library is wrong (or the disagreement must be explained in the test).

#include <cstdint>
#include <random>

#include "igcurv/types.hpp"

namespace oracle {

using igcurv::Tensor;

// gamma[k][i][j] = Γ^k_{ij} (direction j last); dgamma[k][m][i][j] = ∂_j Γ^k_{mi}.
// R[m][k][j][i] ⇔ R(∂_j,∂_i)∂_m = R[m][k][j][i] ∂_k.
inline Tensor riemann(const Tensor& G, const Tensor& dG) {
  const int n = G.dim();
  Tensor R(4, n, igcurv::kRiemann);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double s = dG(k, m, i, j) - dG(k, m, j, i);
          for (int h = 0; h < n; ++h) s += G(h, m, i) * G(k, h, j) - G(h, m, j) * G(k, h, i);
          R(m, k, j, i) = s;
        }
  return R;
}

// Ric[m][i] = Σ_j R[m][j][j][i].
inline Tensor ricci(const Tensor& R) {
  const int n = R.dim();
  Tensor out(2, n);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += R(m, j, j, i);
      out(m, i) = s;
    }
  return out;
}

// T[a][k][l] = T(∂_k,∂_l)^a = Γ^a_{lk} − Γ^a_{kl}.
inline Tensor torsion(const Tensor& G) {
  const int n = G.dim();
  Tensor T(3, n, igcurv::kConn);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) T(a, k, l) = G(a, l, k) - G(a, k, l);
  return T;
}

// Covariant derivative of a (1,2) tensor A[k][m][i], derivative axis last:
// D[k][m][i][j] = ∂_j A + Γ^k_{hj}A^h_{mi} − Γ^h_{mj}A^k_{hi} − Γ^h_{ij}A^k_{mh}.
inline Tensor cov12(const Tensor& G, const Tensor& A, const Tensor& dA) {
  const int n = G.dim();
  Tensor D(4, n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = dA(k, m, i, j);
          for (int h = 0; h < n; ++h)
            s += G(k, h, j) * A(h, m, i) - G(h, m, j) * A(k, h, i) - G(h, i, j) * A(k, m, h);
          D(k, m, i, j) = s;
        }
  return D;
}

// Covariant derivative of a (0,2) tensor, derivative axis last:
// D[i][j][k] = ∂_k A_ij − Γ^h_{ik}A_hj − Γ^h_{jk}A_ih.
inline Tensor cov02(const Tensor& G, const Tensor& A, const Tensor& dA) {
  const int n = G.dim();
  Tensor D(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = dA(i, j, k);
        for (int h = 0; h < n; ++h) s -= G(h, i, k) * A(h, j) + G(h, j, k) * A(i, h);
        D(i, j, k) = s;
      }
  return D;
}

// KK[k][m][j][i] = Σ_l (K^l_{mi}K^k_{lj} − K^l_{mj}K^k_{li}).
inline Tensor kk(const Tensor& K) {
  const int n = K.dim();
  Tensor out(4, n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += K(l, m, i) * K(k, l, j) - K(l, m, j) * K(k, l, i);
          out(k, m, j, i) = s;
        }
  return out;
}

// TK[k][m][j][i] = Σ_l T^l(∂_j,∂_i) K(·,∂_m)^k = Σ_l T[l][j][i] K[k][m][l].
inline Tensor tk(const Tensor& T, const Tensor& K) {
  const int n = K.dim();
  Tensor out(4, n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += T(l, j, i) * K(k, m, l);
          out(k, m, j, i) = s;
        }
  return out;
}

// Levi-Civita from inverse metric and dg[k][i][j] = ∂_k g_ij.
inline Tensor levi_civita(const Tensor& ginv, const Tensor& dg) {
  const int n = ginv.dim();
  Tensor G(3, n, igcurv::kConn);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int m = 0; m < n; ++m)
          s += 0.5 * ginv(l, m) * (dg(j, m, i) + dg(i, m, j) - dg(m, i, j));
        G(l, i, j) = s;
      }
  return G;
}

// C[k][i][j] = ∂_k g_ij − g_mj Γ^m_{ik} − g_mi Γ^m_{jk}.
inline Tensor nonmetricity(const Tensor& g, const Tensor& dg, const Tensor& G) {
  const int n = g.dim();
  Tensor C(3, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = dg(k, i, j);
        for (int m = 0; m < n; ++m) s -= g(m, j) * G(m, i, k) + g(m, i) * G(m, j, k);
        C(k, i, j) = s;
      }
  return C;
}

// Γ*[l][i][k] = Γ[l][i][k] + Σ_j g^{lj} C[k][i][j].
inline Tensor dual(const Tensor& ginv, const Tensor& G, const Tensor& C) {
  const int n = ginv.dim();
  Tensor Gd(3, n, igcurv::kConn);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double s = G(l, i, k);
        for (int j = 0; j < n; ++j) s += ginv(l, j) * C(k, i, j);
        Gd(l, i, k) = s;
      }
  return Gd;
}

// ∂Γ* from the differentiated compatibility split:
// Σ_m g_mj ∂_xΓ*^m_{ik} = ∂_x∂_k g_ij − Σ_m(∂_xg_mi Γ^m_{jk} + g_mi ∂_xΓ^m_{jk}
//                                           + ∂_xg_mj Γ*^m_{ik}).
inline Tensor dual_derivative(const Tensor& g, const Tensor& ginv, const Tensor& dg,
                              const Tensor& d2g, const Tensor& G, const Tensor& dG,
                              const Tensor& Gd) {
  const int n = g.dim();
  Tensor dGd(4, n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int x = 0; x < n; ++x) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) {
            double inner = d2g(x, k, i, j);
            for (int m = 0; m < n; ++m)
              inner -= dg(x, m, i) * G(m, j, k) + g(m, i) * dG(m, j, k, x) +
                       dg(x, m, j) * Gd(m, i, k);
            s += ginv(l, j) * inner;
          }
          dGd(l, i, k, x) = s;
        }
  return dGd;
}

// Lowered curvature RC[x][y][z][v] = Σ_k g[x][k] R[y][k][z][v].
inline Tensor lowered(const Tensor& g, const Tensor& R) {
  const int n = g.dim();
  Tensor RC(4, n, igcurv::kAllLower);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int v = 0; v < n; ++v) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += g(x, k) * R(y, k, z, v);
          RC(x, y, z, v) = s;
        }
  return RC;
}

inline Tensor trace_right(const Tensor& A) {
  const int n = A.dim();
  Tensor t(1, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += A(k, i, k);
    t(i) = s;
  }
  return t;
}

inline Tensor trace_left(const Tensor& A) {
  const int n = A.dim();
  Tensor t(1, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += A(k, k, i);
    t(i) = s;
  }
  return t;
}

// (∇_x T)(∂_a,∂_b)^k from Γ (corrections), T, and dT[k][a][b][x] = ∂_x T.
inline double covT(const Tensor& G, const Tensor& T, const Tensor& dT, int x, int a, int b,
                   int k) {
  const int n = G.dim();
  double s = dT(k, a, b, x);
  for (int h = 0; h < n; ++h)
    s += G(k, h, x) * T(h, a, b) - G(h, a, x) * T(k, h, b) - G(h, b, x) * T(k, a, h);
  return s;
}

// dT[k][a][b][x] = ∂_x T from dΓ: dΓ[k][b][a][x] − dΓ[k][a][b][x].
inline Tensor torsion_derivative(const Tensor& dG) {
  const int n = dG.dim();
  Tensor dT(4, n);
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int x = 0; x < n; ++x) dT(k, a, b, x) = dG(k, b, a, x) - dG(k, a, b, x);
  return dT;
}

// Max residual of the cyclic torsion-curvature identity
// σ R(x,y)z = σ { T(T(x,y),z) + (∇_x T)(y,z) } over all components.
inline double bianchi_cyclic_residual(const Tensor& G, const Tensor& dG, const Tensor& T,
                                      const Tensor& R) {
  const int n = G.dim();
  const Tensor dT = torsion_derivative(dG);
  double worst = 0.0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          const int cyc[3][3] = {{x, y, z}, {y, z, x}, {z, x, y}};
          for (const auto& c : cyc) {
            s += R(c[2], k, c[0], c[1]);
            for (int h = 0; h < n; ++h) s -= T(k, h, c[2]) * T(h, c[0], c[1]);
            s -= covT(G, T, dT, c[0], c[1], c[2], k);
          }
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

// Fill a tensor with integer values in [-3, 3] (exact in double arithmetic).
inline Tensor random_int_tensor(int rank, int dim, std::mt19937_64& rng) {
  Tensor t(rank, dim);
  std::uniform_int_distribution<int> d(-3, 3);
  for (double& v : t.data()) v = static_cast<double>(d(rng));
  return t;
}

}  // namespace oracle
