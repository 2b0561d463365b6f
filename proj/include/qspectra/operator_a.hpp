// Solutions, self-adjoint extensions and explicit spectra of the Jacobi
// operator A with (A e)_n = q^{-n+1} e_{n-1} + q^{-n} e_{n+1}.
#pragma once

#include <vector>

#include "qspectra/qkernel.hpp"
#include "qspectra/scaled.hpp"
#include "qspectra/types.hpp"

namespace qspectra::operator_a {

enum class Sign { plus, minus };

/// (+-i)^n q^{n/2} 1phi1(0;-q;q, -+i x q^{n+1/2}).
Complex psi_pm(int n, Complex x, const QBase& q, Sign sign, const SeriesPolicy& pol = {});

enum class NullKind { p, q };

/// Solutions of A psi = 0 with p_0 = 1, p_1 = 0 and q_0 = 0, q_1 = 1.
double null_solution(int n, NullKind which, const QBase& q);

enum class VarphiMethod {
  combination,  ///< psi^+- combination, evaluated in quad precision
  ramanujan,    ///< power series in x^{-2}
  automatic,    ///< whichever of the two is well conditioned at (n, x)
};

/// The solution of the eigenvalue equation that is square summable at -infinity.
Complex varphi(int n, Complex x, const QBase& q, VarphiMethod method = VarphiMethod::automatic,
               const SeriesPolicy& pol = {});
/// Automatic route without overflow, for sums over far-away indices or arguments.
Scaled varphi_scaled(int n, Complex x, const QBase& q, const SeriesPolicy& pol = {});

enum class NormMethod { closed_form, direct_sum };

/// sum_n varphi_n(x)^2; the squared norm for real x.
Complex varphi_norm_sq(Complex x, const QBase& q, NormMethod method = NormMethod::closed_form,
                       const SeriesPolicy& pol = {});

/// x theta_{q^4}(q^2 x^2) + t theta_{q^4}(x^2), or theta_{q^4}(x^2) for t = inf.
Complex secular(Complex x, const ExtensionParam& t, const QBase& q);
/// Magnitude against which a secular residual is judged.
double secular_scale(Complex x, const ExtensionParam& t, const QBase& q);

/// i q^{1/2} theta4(is|q^2) / theta1(is|q^2) before discarding its imaginary part.
Complex phi_map_raw(double s, const QBase& q);
/// Phi(s) on [0, -2 ln q); Phi(0) is infinite.
ExtensionParam phi_map(double s, const QBase& q);

enum class InverseMethod { monotone_inversion, elliptic_quadrature };

double phi_inverse(const ExtensionParam& t, const QBase& q,
                   InverseMethod method = InverseMethod::monotone_inversion);

struct SpectrumPoint {
  int index = 0;
  double value = 0.0;
  double secular_residual = 0.0;  ///< |secular| / secular_scale
};

struct ASpectrum {
  double s = 0.0;
  ExtensionParam t = ExtensionParam::infinity();
  std::vector<SpectrumPoint> positive_branch;  ///< e^s q^{2n}
  std::vector<SpectrumPoint> negative_branch;  ///< -e^{-s} q^{2m}
};

inline constexpr double kSecularTolerance = 1e-9;

/// Eigenvalues of A_t with indices in the window, each checked against the secular equation.
ASpectrum point_spectrum_a(const ExtensionParam& t, const QBase& q, const SpectrumWindow& window);

/// The extension whose spectrum contains omega.
ExtensionParam extension_for_eigenvalue(double omega, const QBase& q);

/// Size of the boundary functionals of A_t applied to varphi(x) at level n.
double boundary_residual(Complex x, const ExtensionParam& t, const QBase& q, int n);

/// Outcome of checking one summation identity.
struct IdentityCheck {
  Complex lhs{0.0, 0.0};
  Complex rhs{0.0, 0.0};
  double residual = 0.0;         ///< |lhs - rhs| / (1 + |rhs|)
  double mass_residual = 0.0;    ///< |lhs - rhs| / max(sum |terms|, |rhs|)
  int terms = 0;
};

IdentityCheck og_ramanujan_first(Complex z, int l, const QBase& q, const SeriesPolicy& pol = {});
IdentityCheck og_ramanujan_second(Complex z, int l, const QBase& q, const SeriesPolicy& pol = {});
IdentityCheck og_ramanujan_third(Complex z, int k, int l, const QBase& q, const SeriesPolicy& pol = {});

IdentityCheck og_varphi_first(double omega, int m, int n, const QBase& q, const SeriesPolicy& pol = {});
IdentityCheck og_varphi_second(double omega, int m, int n, const QBase& q, const SeriesPolicy& pol = {});
IdentityCheck og_varphi_dual(double omega, int k, int l, const QBase& q, const SeriesPolicy& pol = {});

}  // namespace qspectra::operator_a
