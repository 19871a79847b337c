// Compute every p-value for one observation against the Efron-type region,
// then draw the bootstrap scaling curve behind AU.

#include <cstdio>
#include <iostream>

#include "regionboot.hpp"

int main() {
  using namespace regionboot;

  const Region region = Region::efron(0.1);
  const Point y{0.71, 1.63};

  const PValueReport rep = compute_pvalues(region, y, {kAllMethods.begin(), kAllMethods.end()});
  std::printf("signed distance %.4f, nearest boundary point (%.4f, %.4f)\n", rep.lambda_hat, rep.mu_hat[0],
              rep.mu_hat[1]);
  for (const auto& r : rep.results) {
    if (r.available)
      std::printf("  %-10s %7.4f\n", to_string(r.method).c_str(), r.p);
    else
      std::printf("  %-10s n/a (%s)\n", to_string(r.method).c_str(), r.note.c_str());
  }

  const ScalingCurve curve = bp_curve(region, y, scale_grid(0.5, 1.5, 5), BpRequest{});
  std::cout << curve_csv(curve);
  std::printf("AU3 extrapolated to -1: z = %.4f\n", au_k(curve, 3, Extrapolation::fit).z);
}
