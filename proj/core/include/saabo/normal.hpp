#pragma once

namespace saabo {

double normal_pdf(double z);
/// Φ(z), computed through erfc so both tails keep relative accuracy.
double normal_cdf(double z);
/// Φ⁻¹(u) for u in (0,1): rational approximation refined by one Halley step.
/// Throws DomainError outside (0,1).
double inverse_normal_cdf(double u);

}  // namespace saabo
