// Compares the serial sampling kernels with their threaded counterparts and
// checks that both produce identical values.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "liereduce/numeric.hpp"

using namespace liereduce;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

template <typename Fn> double best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        double ms = ms_since(t0);
        if (ms < best) best = ms;
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    int points = argc > 1 ? std::atoi(argv[1]) : 2000;
    int reps = argc > 2 ? std::atoi(argv[2]) : 3;
    if (points < 1 || reps < 1) {
        std::fprintf(stderr, "usage: %s [points] [reps]\n", argv[0]);
        return 2;
    }

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("sampling kernels, %d points, best of %d runs, %d thread(s)\n\n", points, reps,
                threads);

    CheckConfig cfg;
    cfg.num_points = points;

    // scaled reduction residual with an opaque source term
    auto ctx = Context::make({"x0", "x1", "x2", "nu"});
    ctx->declare_function("gamma", 1);
    VectorField scaled =
        parse("x0", ctx) * VectorField::make(ctx, {"x0", "x1", "x2"},
                                             {"1+nu*x0", "x2+nu*x1", "gamma(x2)/x1"});
    auto psi = ReductionMap::make(ctx, {"x0", "x1", "x2"}, {"x1/x0", "x2"});
    auto hctx = Context::make({"w1", "w2"});
    hctx->declare_function("gamma", 1);
    std::vector<Expr> h = {parse("w2-w1+1/97", hctx), parse("gamma(w2)/w1", hctx)};
    AtomImpls impls;
    impls.set("gamma", AtomImpls::builtin("cos"));

    double r_serial = 0.0, r_par = 0.0;
    double t_serial = best_of(reps, [&] {
        r_serial = residual_reduction_serial(scaled, psi, h, cfg, impls);
    });
    double t_par =
        best_of(reps, [&] { r_par = residual_reduction(scaled, psi, h, cfg, impls); });
    std::printf("%-22s serial %9.2f ms   threaded %9.2f ms   speedup %5.2fx   delta %g\n",
                "residual_reduction", t_serial, t_par, t_serial / t_par, r_serial - r_par);

    // wide polynomial identity, perturbed so the evaluation cannot short-circuit
    auto pctx = Context::make({"x1", "x2", "x3", "x4", "x5", "x6"});
    Expr e = parse("(x1+x2+x3+x4+x5+x6)^6 - (x6+x5+x4+x3+x2+x1)^6 + 1/1000000007", pctx);
    AtomImpls none;
    bool z_serial = false, z_par = true;
    double z_ts = best_of(reps, [&] { z_serial = probabilistic_zero_serial(e, cfg, none); });
    double z_tp = best_of(reps, [&] { z_par = probabilistic_zero(e, cfg, none); });
    std::printf("%-22s serial %9.2f ms   threaded %9.2f ms   speedup %5.2fx   delta %d\n",
                "probabilistic_zero", z_ts, z_tp, z_ts / z_tp,
                static_cast<int>(z_serial) - static_cast<int>(z_par));

    if (r_serial != r_par || z_serial != z_par) {
        std::fprintf(stderr, "kernel variants disagree\n");
        return 1;
    }
    return 0;
}
