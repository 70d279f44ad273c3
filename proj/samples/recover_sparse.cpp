// Recover a 2-sparse vector from 36 Gaussian measurements with each of
// p = 1, 2, inf, then check a quantized version of the same problem.

#include <cstdio>

#include <sparserec/sparserec.hpp>

using namespace sparserec;

int main() {
    const std::size_t n = 64, s = 2, m = optimal_regime_m(n, s);
    const DenseMatrix A = sample_matrix({EnsembleKind::gaussian, 6.0, m, n, 11});
    RngStream rng(12);
    const DenseVector x = generate_signal({n, s, SignalKind::flat_signs, 1.0, SignalNormalization::none}, rng);
    const DenseVector y = A.multiply(x);

    for (double p : {1.0, 2.0, kInf}) {
        const SolveResult r = solve_bpdn(A, y, p, 0.0);
        DenseVector d(n);
        for (std::size_t j = 0; j < n; ++j) d[j] = r.estimate[j] - x[j];
        std::printf("p=%-4g %-10s iters=%-6zu ||x# - x||_2 = %.3g\n", p, to_string(r.status), r.iterations,
                    lp_norm(d, 2.0));
    }

    const double theta = 0.2;
    const QcbpResult q = solve_qcbp(A, quantize(y, theta), theta);
    DenseVector d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = q.solve.estimate[j] - x[j];
    std::printf("quantized theta=%g: consistent=%d ||x# - x||_2 / theta = %.3g\n", theta, q.consistency.consistent,
                lp_norm(d, 2.0) / theta);
}
