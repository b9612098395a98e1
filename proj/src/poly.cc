#include "treeint/poly.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "treeint/error.h"
#include "treeint/subsets.h"

namespace treeint::poly {

namespace {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Shared by psi and the SII weight so both produce identical bits.
double sii_coefficient(int d, int k) {
  return 1.0 / (static_cast<double>(d + 1) * binomial_real(d, k));
}

LongMatrix vandermonde(std::span<const double> points) {
  const int m = static_cast<int>(points.size());
  LongMatrix v(m, m);
  for (int r = 0; r < m; ++r) {
    long double power = 1.0L;
    for (int c = 0; c < m; ++c) {
      v(r, c) = power;
      power *= static_cast<long double>(points[r]);
    }
  }
  return v;
}

void require_same_storage(const InterpPoly& a, const InterpPoly& b) {
  if (a.evals.size() != b.evals.size()) {
    throw Error("interpolation polynomials live on different grids (" +
                std::to_string(a.storage_degree()) + " vs " +
                std::to_string(b.storage_degree()) + ")");
  }
}

}  // namespace

std::vector<double> chebyshev_points(int degree) {
  if (degree < 0) throw InputError("negative polynomial degree");
  std::vector<double> out(degree + 1);
  const double denom = 2.0 * (degree + 1);
  for (int k = 0; k <= degree; ++k) {
    out[k] = std::cos((2.0 * k + 1.0) * std::numbers::pi / denom);
  }
  // The middle node of an odd-sized set is cos(pi/2), which is not exactly 0
  // in floating point.
  if (degree % 2 == 0) out[degree / 2] = 0.0;
  return out;
}

int zero_free_degree(int degree) {
  if (degree < 0) degree = 0;
  return degree % 2 == 0 ? degree + 1 : degree;
}

ChebyshevGrid::ChebyshevGrid(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0 || max_degree > kMaxDegree) {
    throw LimitError("polynomial degree " + std::to_string(max_degree) +
                     " exceeds the supported maximum " +
                     std::to_string(kMaxDegree));
  }
  points_.resize(max_degree + 1);
  barycentric_.resize(max_degree + 1);
  powers_.resize(max_degree + 1);
  for (int d = 0; d <= max_degree; ++d) {
    points_[d] = chebyshev_points(d);
    auto& bary = barycentric_[d];
    bary.resize(d + 1);
    const double denom = 2.0 * (d + 1);
    for (int k = 0; k <= d; ++k) {
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      bary[k] = sign * std::sin((2.0 * k + 1.0) * std::numbers::pi / denom);
    }
    auto& powers = powers_[d];
    powers.assign(max_degree + 1, std::vector<double>(d + 1, 1.0));
    for (int k = 1; k <= max_degree; ++k) {
      for (int j = 0; j <= d; ++j) {
        powers[k][j] = powers[k - 1][j] * (1.0 + points_[d][j]);
      }
    }
  }
}

void ChebyshevGrid::check_degree(int degree) const {
  if (degree < 0 || degree > max_degree_) {
    throw LimitError("degree " + std::to_string(degree) +
                     " outside the grid range 0.." +
                     std::to_string(max_degree_));
  }
}

std::span<const double> ChebyshevGrid::points(int degree) const {
  check_degree(degree);
  return points_[degree];
}

std::span<const double> ChebyshevGrid::one_plus_y_power(int degree,
                                                        int k) const {
  check_degree(degree);
  check_degree(k);
  return powers_[degree][k];
}

std::span<const double> ChebyshevGrid::barycentric_weights(int degree) const {
  check_degree(degree);
  return barycentric_[degree];
}

InterpPoly to_interp(std::span<const double> coeffs, const ChebyshevGrid& grid,
                     std::optional<int> storage_degree) {
  if (coeffs.empty()) throw InputError("empty coefficient vector");
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw InputError("non-finite coefficient");
  }
  const int degree = static_cast<int>(coeffs.size()) - 1;
  const int storage = storage_degree.value_or(degree);
  if (storage < degree) {
    throw InputError("storage grid smaller than the polynomial degree");
  }
  const auto points = grid.points(storage);
  InterpPoly out{degree, std::vector<double>(storage + 1)};
  for (int k = 0; k <= storage; ++k) {
    double acc = 0.0;
    for (int j = degree; j >= 0; --j) acc = acc * points[k] + coeffs[j];
    out.evals[k] = acc;
  }
  return out;
}

std::vector<double> to_coeffs(const InterpPoly& p, const ChebyshevGrid& grid) {
  const int storage = p.storage_degree();
  const LongMatrix v = vandermonde(grid.points(storage));
  LongVector rhs(storage + 1);
  for (int k = 0; k <= storage; ++k) rhs(k) = p.evals[k];
  const LongVector a = v.partialPivLu().solve(rhs);
  std::vector<double> out(p.degree + 1);
  for (int k = 0; k <= p.degree; ++k) out[k] = static_cast<double>(a(k));
  return out;
}

double evaluate(const InterpPoly& p, double y, const ChebyshevGrid& grid) {
  const int storage = p.storage_degree();
  const auto points = grid.points(storage);
  const auto weights = grid.barycentric_weights(storage);
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k <= storage; ++k) {
    const double diff = y - points[k];
    if (diff == 0.0) return p.evals[k];
    const double t = weights[k] / diff;
    num += t * p.evals[k];
    den += t;
  }
  return num / den;
}

InterpPoly reevaluate(const InterpPoly& p, int storage_degree,
                      const ChebyshevGrid& grid) {
  if (storage_degree == p.storage_degree()) return p;
  if (storage_degree < p.degree) {
    throw Error("cannot store a degree-" + std::to_string(p.degree) +
                " polynomial on a degree-" + std::to_string(storage_degree) +
                " grid");
  }
  const auto target = grid.points(storage_degree);
  InterpPoly out{p.degree, std::vector<double>(storage_degree + 1)};
  for (int k = 0; k <= storage_degree; ++k) {
    out.evals[k] = evaluate(p, target[k], grid);
  }
  return out;
}

InterpPoly interp_mul(const InterpPoly& a, const InterpPoly& b) {
  require_same_storage(a, b);
  InterpPoly out{a.degree + b.degree, a.evals};
  if (out.degree > a.storage_degree()) {
    throw Error("product degree exceeds the storage grid");
  }
  for (std::size_t k = 0; k < out.evals.size(); ++k) out.evals[k] *= b.evals[k];
  return out;
}

InterpPoly interp_div(const InterpPoly& a, const InterpPoly& b) {
  require_same_storage(a, b);
  InterpPoly out{a.degree - b.degree, a.evals};
  for (std::size_t k = 0; k < out.evals.size(); ++k) {
    if (std::abs(b.evals[k]) < 1e-300) {
      throw SingularPointError("division by a vanishing evaluation at node " +
                               std::to_string(k));
    }
    out.evals[k] /= b.evals[k];
  }
  return out;
}

InterpPoly raise_degree(const InterpPoly& p, int k, const ChebyshevGrid& grid) {
  if (k < 0) throw Error("negative degree shift");
  InterpPoly out =
      p.degree + k > p.storage_degree() ? reevaluate(p, p.degree + k, grid) : p;
  const auto power = grid.one_plus_y_power(out.storage_degree(), k);
  for (std::size_t j = 0; j < out.evals.size(); ++j) out.evals[j] *= power[j];
  out.degree += k;
  return out;
}

InterpPoly oplus(const InterpPoly& g1, const InterpPoly& g2,
                 const ChebyshevGrid& grid) {
  const InterpPoly& hi = g1.degree >= g2.degree ? g1 : g2;
  const InterpPoly& lo = g1.degree >= g2.degree ? g2 : g1;
  const int storage = std::max(hi.storage_degree(), lo.storage_degree());
  InterpPoly out = reevaluate(hi, storage, grid);
  const InterpPoly lo_on_grid = reevaluate(lo, storage, grid);
  const auto power = grid.one_plus_y_power(storage, hi.degree - lo.degree);
  for (int k = 0; k <= storage; ++k) {
    out.evals[k] += lo_on_grid.evals[k] * power[k];
  }
  return out;
}

double cii_weight(const CiiSpec& spec, int n, int s, int t) {
  if (s < 1 || s > n) {
    throw InputError("interaction order " + std::to_string(s) +
                     " outside 1.." + std::to_string(n));
  }
  if (t < 0 || t > n - s) {
    throw InputError("coalition size " + std::to_string(t) + " outside 0.." +
                     std::to_string(n - s));
  }
  switch (spec.kind) {
    case IndexKind::kSii:
      return sii_coefficient(n - s, t);
    case IndexKind::kBanzhaf:
      return std::ldexp(1.0, -(n - s));
    case IndexKind::kCustom:
      if (!spec.custom) throw InputError("custom index without weight function");
      return spec.custom(n, s, t);
  }
  throw InputError("unknown index kind");
}

struct WeightTables::Solvers {
  // LU factorization of V(Y_g)^T per storage degree g.
  std::vector<Eigen::PartialPivLU<LongMatrix>> transposed;
};

WeightTables::WeightTables(int max_degree)
    : grid_(max_degree), solvers_(std::make_unique<Solvers>()) {
  solvers_->transposed.reserve(max_degree + 1);
  psi_.resize(max_degree + 1);
  kappa_.resize(max_degree + 1);
  for (int g = 0; g <= max_degree; ++g) {
    const LongMatrix v = vandermonde(grid_.points(g));
    solvers_->transposed.emplace_back(v.transpose());
    auto& solver = solvers_->transposed.back();
    psi_[g].resize(g + 1);
    kappa_[g].resize(g + 1);
    for (int d = 0; d <= g; ++d) {
      LongVector psi_rhs = LongVector::Zero(g + 1);
      LongVector kappa_rhs = LongVector::Zero(g + 1);
      for (int k = 0; k <= d; ++k) {
        psi_rhs(k) = sii_coefficient(d, k);
        kappa_rhs(k) = 1.0L;
      }
      const LongVector psi_w = solver.solve(psi_rhs);
      const LongVector kappa_w = solver.solve(kappa_rhs);
      psi_[g][d].resize(g + 1);
      kappa_[g][d].resize(g + 1);
      for (int k = 0; k <= g; ++k) {
        psi_[g][d][k] = static_cast<double>(psi_w(k));
        kappa_[g][d][k] = static_cast<double>(kappa_w(k));
      }
    }
  }
}

WeightTables::~WeightTables() = default;
WeightTables::WeightTables(WeightTables&&) noexcept = default;
WeightTables& WeightTables::operator=(WeightTables&&) noexcept = default;

namespace {

void check_table_index(int storage, int degree, int max_degree) {
  if (storage < 0 || storage > max_degree || degree < 0 || degree > storage) {
    throw LimitError("no weight table for storage degree " +
                     std::to_string(storage) + ", degree " +
                     std::to_string(degree));
  }
}

}  // namespace

std::span<const double> WeightTables::psi_vector(int storage_degree,
                                                 int degree) const {
  check_table_index(storage_degree, degree, max_degree());
  return psi_[storage_degree][degree];
}

std::span<const double> WeightTables::kappa_vector(int storage_degree,
                                                   int degree) const {
  check_table_index(storage_degree, degree, max_degree());
  return kappa_[storage_degree][degree];
}

std::vector<double> WeightTables::transform(
    int storage_degree, std::span<const double> coeff_weights) const {
  check_table_index(storage_degree, 0, max_degree());
  if (static_cast<int>(coeff_weights.size()) > storage_degree + 1) {
    throw LimitError("more coefficient weights than grid nodes");
  }
  LongVector rhs = LongVector::Zero(storage_degree + 1);
  for (std::size_t k = 0; k < coeff_weights.size(); ++k) {
    rhs(k) = coeff_weights[k];
  }
  const LongVector w = solvers_->transposed[storage_degree].solve(rhs);
  std::vector<double> out(storage_degree + 1);
  for (int k = 0; k <= storage_degree; ++k) out[k] = static_cast<double>(w(k));
  return out;
}

double inner(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double psi(const InterpPoly& p, const WeightTables& tables) {
  return inner(p.evals, tables.psi_vector(p.storage_degree(), p.degree));
}

double kappa(const InterpPoly& p, const WeightTables& tables) {
  return inner(p.evals, tables.kappa_vector(p.storage_degree(), p.degree));
}

std::vector<double> cii_weight_table(const CiiSpec& spec, int n, int s,
                                     const WeightTables& tables,
                                     std::optional<int> storage_degree) {
  const int d = n - s;
  if (s < 1 || d < 0) {
    throw InputError("interaction order " + std::to_string(s) +
                     " outside 1.." + std::to_string(n));
  }
  const int storage = storage_degree.value_or(d);
  if (d > tables.max_degree() || storage > tables.max_degree()) {
    throw LimitError("index weights of degree " + std::to_string(d) +
                     " exceed the weight tables (max " +
                     std::to_string(tables.max_degree()) + ")");
  }
  if (spec.kind == IndexKind::kSii) {
    const auto v = tables.psi_vector(storage, d);
    return {v.begin(), v.end()};
  }
  std::vector<double> coeffs(d + 1);
  for (int k = 0; k <= d; ++k) coeffs[k] = cii_weight(spec, n, s, d - k);
  return tables.transform(storage, coeffs);
}

UnitGrid::UnitGrid(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0 || max_degree > kMaxUnitDegree) {
    throw LimitError("polynomial degree " + std::to_string(max_degree) +
                     " exceeds the supported maximum " +
                     std::to_string(kMaxUnitDegree));
  }
  points_.resize(max_degree + 1);
  complement_.resize(max_degree + 1);
  ones_.resize(max_degree + 1);
  integral_.resize(max_degree + 1);
  midpoint_.resize(max_degree + 1);
  for (int d = 0; d <= max_degree; ++d) {
    const int m = d + 1;
    points_[d].resize(m);
    complement_[d].resize(m);
    ones_[d].assign(m, 1.0);
    integral_[d].resize(m);
    midpoint_[d].assign(m, 0.0);
    std::vector<long double> bary(m);
    long double bary_sum = 0.0L;
    for (int k = 0; k < m; ++k) {
      const long double theta =
          (2.0L * k + 1.0L) * std::numbers::pi_v<long double> / (2.0L * m);
      const long double half_sin = std::sin(theta / 2.0L);
      const long double half_cos = std::cos(theta / 2.0L);
      points_[d][k] = static_cast<double>(half_sin * half_sin);
      complement_[d][k] = static_cast<double>(half_cos * half_cos);
      long double sum = 0.0L;
      for (int j = 1; j <= m / 2; ++j) {
        sum += std::cos(2.0L * j * theta) / (4.0L * j * j - 1.0L);
      }
      integral_[d][k] = static_cast<double>((1.0L - 2.0L * sum) / m);
      // Barycentric weights (-1)^k sin(theta_k); t = 1/2 maps to x = 0.
      const long double x = std::cos(theta);
      bary[k] = (k % 2 == 0 ? 1.0L : -1.0L) * std::sin(theta) / -x;
      bary_sum += bary[k];
    }
    if (m % 2 == 1) {
      midpoint_[d][m / 2] = 1.0;
    } else {
      for (int k = 0; k < m; ++k) {
        midpoint_[d][k] = static_cast<double>(bary[k] / bary_sum);
      }
    }
  }
}

void UnitGrid::check_degree(int degree) const {
  if (degree < 0 || degree > max_degree_) {
    throw LimitError("no node set of degree " + std::to_string(degree) +
                     " (grid built up to " + std::to_string(max_degree_) + ")");
  }
}

std::span<const double> UnitGrid::points(int degree) const {
  check_degree(degree);
  return points_[degree];
}

std::span<const double> UnitGrid::complement(int degree) const {
  check_degree(degree);
  return complement_[degree];
}

std::span<const double> UnitGrid::ones(int degree) const {
  check_degree(degree);
  return ones_[degree];
}

std::span<const double> UnitGrid::integral_weights(int degree) const {
  check_degree(degree);
  return integral_[degree];
}

std::span<const double> UnitGrid::midpoint_weights(int degree) const {
  check_degree(degree);
  return midpoint_[degree];
}

std::vector<double> unit_cii_weight_table(const CiiSpec& spec, int n, int s,
                                          const UnitGrid& grid, int storage) {
  const int d = n - s;
  if (s < 1 || d < 0) {
    throw InputError("interaction order " + std::to_string(s) +
                     " outside 1.." + std::to_string(n));
  }
  if (spec.kind == IndexKind::kSii) {
    const auto v = grid.integral_weights(storage);
    return {v.begin(), v.end()};
  }
  if (spec.kind == IndexKind::kBanzhaf) {
    const auto v = grid.midpoint_weights(storage);
    return {v.begin(), v.end()};
  }
  // In Bernstein form q = sum_k beta_k B^d_k the coefficient a_k of y^k is
  // binom(d,k) beta_k. Match the functional on the Bernstein basis of
  // degree m = min(d, storage), elevating to degree d where m < d, and take
  // the minimum-norm weights when there are more nodes than conditions.
  const int m = std::min(d, storage);
  std::vector<long double> c(d + 1);
  for (int k = 0; k <= d; ++k) c[k] = cii_weight(spec, n, s, d - k);
  LongVector rhs(m + 1);
  for (int b = 0; b <= m; ++b) {
    long double acc = 0.0L;
    if (m == d) {
      acc = c[b] * binomial_real(d, b);
    } else {
      for (int k = b; k <= b + d - m; ++k) {
        acc += c[k] * binomial_real(d - m, k - b);
      }
      acc *= binomial_real(m, b);
    }
    rhs(b) = acc;
  }
  const auto t = grid.points(storage);
  const auto u = grid.complement(storage);
  LongMatrix a(m + 1, storage + 1);
  for (int b = 0; b <= m; ++b) {
    for (int j = 0; j <= storage; ++j) {
      a(b, j) = binomial_real(m, b) *
                std::pow(static_cast<long double>(t[j]), b) *
                std::pow(static_cast<long double>(u[j]), m - b);
    }
  }
  const LongVector w = a.completeOrthogonalDecomposition().solve(rhs);
  std::vector<double> out(storage + 1);
  for (int j = 0; j <= storage; ++j) out[j] = static_cast<double>(w(j));
  return out;
}

}  // namespace treeint::poly
