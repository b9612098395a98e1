#ifndef TREEINT_POLY_H_
#define TREEINT_POLY_H_

// Polynomials in multipoint-interpolation form.
//
// A polynomial is stored as its values on a set of Chebyshev nodes, so that
// products and exact quotients become elementwise vector operations. Linear
// functionals on the monomial coefficients (the weighted sums psi and kappa)
// are evaluated as inner products between the value vector and a precomputed
// weight vector w = V(Y)^{-T} c, where V(Y) is the Vandermonde matrix of the
// nodes and c the coefficient weights.
//
// Every polynomial carries a nominal degree in addition to its storage grid.
// The storage grid may be larger than the nominal degree requires (a product
// is evaluated on a grid big enough for the final degree; a quotient keeps
// the storage of its dividend). Weight vectors are selected by the pair
// (storage degree, nominal degree).

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace treeint::poly {

// Largest supported storage degree. Conditioning of the Vandermonde system
// degrades noticeably beyond ~30.
inline constexpr int kMaxDegree = 65;

// First-kind Chebyshev nodes cos((2k+1)pi / (2(d+1))), k = 0..d.
std::vector<double> chebyshev_points(int degree);

// Smallest storage degree >= `degree` whose node set excludes y = 0
// (an even number of nodes). Factors (p + y) with p = 0 occur whenever an
// instance fails a split, so such grids keep every divisor nonzero.
int zero_free_degree(int degree);

// Node sets Y_d for d = 0..max_degree and the derived per-node tables.
class ChebyshevGrid {
 public:
  explicit ChebyshevGrid(int max_degree);

  int max_degree() const { return max_degree_; }
  std::span<const double> points(int degree) const;
  // (1 + y)^k on Y_degree, for 0 <= k <= max_degree.
  std::span<const double> one_plus_y_power(int degree, int k) const;
  // Barycentric weights of the second form for Y_degree.
  std::span<const double> barycentric_weights(int degree) const;

 private:
  void check_degree(int degree) const;

  int max_degree_;
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<double>> barycentric_;
  std::vector<std::vector<std::vector<double>>> powers_;
};

struct InterpPoly {
  int degree = 0;
  std::vector<double> evals;

  int storage_degree() const { return static_cast<int>(evals.size()) - 1; }
};

// Evaluates the monomial coefficients on Y_storage. The storage degree
// defaults to coeffs.size() - 1.
InterpPoly to_interp(std::span<const double> coeffs, const ChebyshevGrid& grid,
                     std::optional<int> storage_degree = std::nullopt);

// Recovers degree+1 monomial coefficients by a Vandermonde solve.
std::vector<double> to_coeffs(const InterpPoly& p, const ChebyshevGrid& grid);

// Value at an arbitrary y (barycentric interpolation from the storage grid).
double evaluate(const InterpPoly& p, double y, const ChebyshevGrid& grid);

// Same polynomial on a larger storage grid.
InterpPoly reevaluate(const InterpPoly& p, int storage_degree,
                      const ChebyshevGrid& grid);

InterpPoly interp_mul(const InterpPoly& a, const InterpPoly& b);

// Elementwise quotient. The caller guarantees exact divisibility when the
// result is meant to be a polynomial. Throws SingularPointError if a divisor
// value is (numerically) zero.
InterpPoly interp_div(const InterpPoly& a, const InterpPoly& b);

// p * (1+y)^k with nominal degree raised by k.
InterpPoly raise_degree(const InterpPoly& p, int k, const ChebyshevGrid& grid);

// Degree-scaling sum: g1 + g2 * (1+y)^(d1-d2) for d1 >= d2 (symmetrized).
// The result lives on the larger of the two storage grids.
InterpPoly oplus(const InterpPoly& g1, const InterpPoly& g2,
                 const ChebyshevGrid& grid);

enum class IndexKind { kSii, kBanzhaf, kCustom };

// Cardinal interaction index weights w_s(t) for |S| = s, |T| = t.
struct CiiSpec {
  IndexKind kind = IndexKind::kSii;
  // Only consulted for kCustom: (n, s, t) -> weight.
  std::function<double(int n, int s, int t)> custom;
};

double cii_weight(const CiiSpec& spec, int n, int s, int t);

// Precomputed weight vectors for psi and kappa on every storage grid up to
// max_degree. Immutable after construction.
class WeightTables {
 public:
  explicit WeightTables(int max_degree);
  ~WeightTables();
  WeightTables(WeightTables&&) noexcept;
  WeightTables& operator=(WeightTables&&) noexcept;

  int max_degree() const { return grid_.max_degree(); }
  const ChebyshevGrid& grid() const { return grid_; }

  // V(Y_g)^{-T} (B_d / (d+1)), B_d(y) = sum_k binom(d,k)^{-1} y^k.
  std::span<const double> psi_vector(int storage_degree, int degree) const;
  // V(Y_g)^{-T} (1, ..., 1) over the first degree+1 coefficients.
  std::span<const double> kappa_vector(int storage_degree, int degree) const;
  // V(Y_g)^{-T} c for arbitrary coefficient weights (zero-padded).
  std::vector<double> transform(int storage_degree,
                                std::span<const double> coeff_weights) const;

 private:
  struct Solvers;

  ChebyshevGrid grid_;
  std::unique_ptr<Solvers> solvers_;
  // [storage][degree] -> vector of length storage+1.
  std::vector<std::vector<std::vector<double>>> psi_;
  std::vector<std::vector<std::vector<double>>> kappa_;
};

double psi(const InterpPoly& p, const WeightTables& tables);
double kappa(const InterpPoly& p, const WeightTables& tables);

// Weight vector for psi^CII at nominal degree d = n - s on the given storage
// grid (default: degree d). The coefficient of y^k weighs coalitions of size
// d - k, i.e. c_k = w_s(d - k).
std::vector<double> cii_weight_table(const CiiSpec& spec, int n, int s,
                                     const WeightTables& tables,
                                     std::optional<int> storage_degree =
                                         std::nullopt);

// Homogenized node sets. With t = y / (1 + y) a polynomial p of nominal
// degree d is stored through q(t) = (1-t)^d p(t / (1-t)) on Chebyshev nodes
// of (0, 1). A factor (a + y) becomes a (1-t) + t, the lift by (1+y)^k is the
// identity, psi_d(p) is the integral of q over [0, 1] and
// kappa_d(p) = 2^d q(1/2). Both functionals use interpolatory rules whose
// weights stay bounded, so no Vandermonde system is solved.
inline constexpr int kMaxUnitDegree = 512;

class UnitGrid {
 public:
  explicit UnitGrid(int max_degree);

  int max_degree() const { return max_degree_; }
  // Nodes t_k = sin^2(theta_k / 2), theta_k = (2k+1)pi / (2(d+1)).
  std::span<const double> points(int degree) const;
  // 1 - t_k, computed without cancellation.
  std::span<const double> complement(int degree) const;
  std::span<const double> ones(int degree) const;
  // Fejer's first rule on [0, 1]; all weights are positive.
  std::span<const double> integral_weights(int degree) const;
  // Lagrange basis values at t = 1/2.
  std::span<const double> midpoint_weights(int degree) const;

 private:
  void check_degree(int degree) const;

  int max_degree_;
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<double>> complement_;
  std::vector<std::vector<double>> ones_;
  std::vector<std::vector<double>> integral_;
  std::vector<std::vector<double>> midpoint_;
};

// Weight vector for psi^CII at nominal degree d = n - s on the homogenized
// grid of the given storage degree. Exact for every q of degree at most
// min(d, storage).
std::vector<double> unit_cii_weight_table(const CiiSpec& spec, int n, int s,
                                          const UnitGrid& grid, int storage);

double inner(std::span<const double> a, std::span<const double> b);

}  // namespace treeint::poly

#endif  // TREEINT_POLY_H_
