#include "gsda/spectral.hpp"

#include "gsda/graph.hpp"

#include <cstdio>
#include <ostream>

namespace gsda {

Basis<double> graph_basis(const Points& points, int k) {
  return share(eigendecompose(laplacian(build_knn_graph(points, k))));
}

void write_spectrum_csv(std::ostream& out, const SpectralCoefficients<double>& coeffs) {
  const Points e = frequency_energies(coeffs);
  out << "index,lambda,energy_x,energy_y,energy_z,energy_total\n";
  char buf[192];
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const int len = std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long>(i),
                                  coeffs.basis->eigenvalues(i), e(i, 0), e(i, 1), e(i, 2), e.row(i).sum());
    out.write(buf, len);
  }
}

}  // namespace gsda
