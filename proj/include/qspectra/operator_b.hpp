// Solutions, spectrum, Green function and spectral measure of the Jacobi
// operator B with (B e)_n = e_{n-1} + alpha q^{-n} e_n + e_{n+1}.
#pragma once

#include <functional>
#include <vector>

#include "qspectra/qkernel.hpp"
#include "qspectra/scaled.hpp"
#include "qspectra/types.hpp"

namespace qspectra::operator_b {

/// alpha and q, with alpha = q^Delta beta and |beta| in (q,1].
class BParams {
 public:
  BParams(double alpha, QBase q);

  double alpha() const { return alpha_; }
  const QBase& q() const { return q_; }
  /// alpha = 0 is the free operator: spectrum [-2,2], no eigenvalues.
  bool is_free() const { return alpha_ == 0.0; }
  int delta() const;
  double beta() const;

 private:
  double alpha_;
  QBase q_;
};

/// z with 0 < |z| <= 1 and its image mu = z + 1/z.
struct JoukowskiPoint {
  Complex z;
  Complex mu;

  static JoukowskiPoint from_z(Complex z);
  /// The preimage of mu inside the closed unit disk.
  static JoukowskiPoint from_mu(Complex mu);
};

/// Solution decaying at +infinity.
Complex f_n(int n, Complex z, const BParams& p, const SeriesPolicy& pol = {});
Scaled f_scaled(int n, Complex z, const BParams& p, const SeriesPolicy& pol = {});

/// Solution decaying at -infinity for |z| < 1.
Complex g_n(int n, Complex z, const BParams& p, const SeriesPolicy& pol = {});
Scaled g_scaled(int n, Complex z, const BParams& p, const SeriesPolicy& pol = {});

/// Residual of v_{n-1} + (alpha q^{-n} - mu) v_n + v_{n+1} relative to its terms.
double recurrence_residual(const std::function<Scaled(int)>& v, int n, Complex z, const BParams& p);

enum class WronskianMethod { direct, closed_form };

/// f_{n+1} g_n - f_n g_{n+1}; the direct method checks constancy over n in {-10, 0, 10}.
Complex wronskian_fg(Complex z, const BParams& p, WronskianMethod method = WronskianMethod::closed_form,
                     const SeriesPolicy& pol = {});
Complex wronskian_at(int n, Complex z, const BParams& p, const SeriesPolicy& pol = {});

struct DarbouxConstants {
  Complex a;  ///< coefficient of e^{-i n phi}
  Complex b;  ///< coefficient of e^{+i n phi}
};

/// f_n(e^{i phi}) = e^{-i n phi} A + e^{i n phi} B + o(1) as n -> -infinity.
DarbouxConstants darboux_constants(double phi, const BParams& p, const SeriesPolicy& pol = {});
/// |f_n(e^{i phi}) - e^{-i n phi} A - e^{i n phi} B|.
double darboux_residual(int n, double phi, const BParams& p, const SeriesPolicy& pol = {});

enum class Endpoint { zero, pi };

/// Leading coefficient c in f_n(+-1) = c |n| + O(1) as n -> -infinity; needs alpha in (q,1].
double darboux_boundary_slope(Endpoint e, const BParams& p, const SeriesPolicy& pol = {});

struct BEigenvalue {
  int m = 0;
  double value = 0.0;
};

/// alpha^{-1} q^m + alpha q^{-m} for Delta < m <= m_max.
std::vector<BEigenvalue> point_spectrum_b(const BParams& p, int m_max);

/// v_{m,j} over the window of j.
std::vector<double> eigenvector_b(int m, const BParams& p, const SpectrumWindow& j_range,
                                  const SeriesPolicy& pol = {});
Scaled eigenvector_entry(int m, int j, const BParams& p, const SeriesPolicy& pol = {});

enum class NormMethod { closed_form, direct_sum };

double eigenvector_norm(int m, const BParams& p, NormMethod method = NormMethod::closed_form,
                        const SeriesPolicy& pol = {});

/// Resolvent matrix element at mu(z), 0 < |z| < 1.
Complex green_function(int k, int l, Complex z, const BParams& p, const SeriesPolicy& pol = {});

struct ConnectionCoefficients {
  Complex a_z;          ///< theta_q(alpha/z) / theta_q(z^{-2})
  Complex a_inv_z;      ///< the same at 1/z
  double max_residual;  ///< of f_n = A(z) g_n(z) + A(1/z) g_n(1/z) over the test window
};

ConnectionCoefficients connection_coeffs(Complex z, const BParams& p, const SpectrumWindow& test = {-5, 5},
                                         const SeriesPolicy& pol = {});

/// Density of E_{k,l} with respect to phi, energy 2 cos phi.
double ac_density(double phi, int k, int l, const BParams& p, const SeriesPolicy& pol = {});
/// The same density with respect to the energy x in (-2,2).
double ac_density_energy(double x, int k, int l, const BParams& p, const SeriesPolicy& pol = {});
/// (G(x + i eps) - G(x - i eps)) / (2 pi i).
double stieltjes_perron_density(double x, double eps, int k, int l, const BParams& p,
                                const SeriesPolicy& pol = {});

struct Atom {
  int m = 0;
  double location = 0.0;
  double weight = 0.0;
};

/// Weight of E_{k,l} at the eigenvalue with index m.
double atom_weight(int m, int k, int l, const BParams& p, const SeriesPolicy& pol = {});

struct BSpectralMeasure {
  int k = 0;
  int l = 0;
  std::vector<Atom> atoms;
  std::function<double(double)> ac_density;  ///< phi in (0,pi)
};

/// All atoms with non-negligible weight plus the density sampler.
BSpectralMeasure spectral_measure_element(int k, int l, const BParams& p, const SeriesPolicy& pol = {});

struct EnergyInterval {
  double lo;
  double hi;
};

/// A finite union of closed intervals, or the whole line.
struct EnergySet {
  bool whole_line = false;
  std::vector<EnergyInterval> intervals;

  static EnergySet real_line() { return EnergySet{true, {}}; }
  bool contains(double x) const;
};

inline constexpr double kEndpointInset = 1e-9;
inline constexpr double kMeasureQuadratureTol = 1e-10;

/// E_{k,l}(set): atoms inside the set plus the density integrated over 2 cos phi in the set.
double spectral_measure(int k, int l, const EnergySet& set, const BParams& p, const SeriesPolicy& pol = {});

/// |sum_j J_{j+m}(x_m) J_{j+n}(x_n) - delta_{mn}/(1 - x_m^2)|, x_m = alpha^{-1} q^m.
double qbessel_orthogonality(int m, int n, const BParams& p, const SeriesPolicy& pol = {});

/// sum_j J_j(x;q)^2, equal to 1/(1 - x^2) for |x| < 1.
double qbessel_square_sum(double x, const QBase& q, const SeriesPolicy& pol = {});

}  // namespace qspectra::operator_b
