// Times the OpenMP kernels against the serial reference and checks that both
// produce identical bits.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "pgdf/kernels.hpp"

using namespace pgdf;
namespace k = pgdf::kernels;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm once
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    Matrix m(r, c);
    for (double& v : m.data) v = unit(rng);
    return m;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

void report(const char* name, double serial_ms, double omp_ms, bool exact) {
    std::printf("%-22s serial %8.3f ms   openmp %8.3f ms   speedup %5.2fx   bits %s\n", name,
                serial_ms, omp_ms, serial_ms / omp_ms, exact ? "equal" : "DIFFER");
}

} // namespace

int main(int argc, char** argv) {
    int reps = 5;
    if (argc > 1) reps = std::stoi(argv[1]);
    std::printf("threads available: %d (openmp %s)\n\n", k::max_threads(),
                k::openmp_compiled() ? "on" : "off");

    Rng rng = make_rng(7);

    {
        const std::size_t B = 1024, I = 512, O = 512;
        const Matrix X = random_matrix(B, I, rng);
        const Matrix W = random_matrix(I, O, rng);
        std::vector<double> b(O, 0.1);
        Matrix ys, yo;
        const double ts = time_ms([&] { k::serial::linear_forward(X, W, b, ys); }, reps);
        const double to = time_ms([&] { k::omp::linear_forward(X, W, b, yo); }, reps);
        report("linear_forward", ts, to, bits_equal(ys.data, yo.data));

        const Matrix dY = random_matrix(B, O, rng);
        Matrix dxs, dxo;
        const double ts2 = time_ms([&] { k::serial::linear_grad_input(dY, W, dxs); }, reps);
        const double to2 = time_ms([&] { k::omp::linear_grad_input(dY, W, dxo); }, reps);
        report("linear_grad_input", ts2, to2, bits_equal(dxs.data, dxo.data));

        Matrix dws, dwo;
        std::vector<double> dbs, dbo;
        const double ts3 = time_ms([&] { k::serial::linear_grad_params(X, dY, dws, dbs); }, reps);
        const double to3 = time_ms([&] { k::omp::linear_grad_params(X, dY, dwo, dbo); }, reps);
        report("linear_grad_params", ts3, to3,
               bits_equal(dws.data, dwo.data) && bits_equal(dbs, dbo));
    }

    {
        const std::size_t B = 4096, C = 128;
        const Matrix Z = random_matrix(B, C, rng);
        Matrix ps, po;
        const double ts = time_ms([&] { k::serial::softmax_rows(Z, ps); }, reps);
        const double to = time_ms([&] { k::omp::softmax_rows(Z, po); }, reps);
        report("softmax_rows", ts, to, bits_equal(ps.data, po.data));

        Matrix as, ao;
        const double ts2 = time_ms([&] { k::serial::tanh_forward(Z, as); }, reps);
        const double to2 = time_ms([&] { k::omp::tanh_forward(Z, ao); }, reps);
        report("tanh_forward", ts2, to2, bits_equal(as.data, ao.data));
    }

    {
        k::ConvDims dims{256, 16, 32, 64, 3, 1};
        Rng crng = make_rng(11);
        std::normal_distribution<double> unit(0.0, 1.0);
        std::vector<double> X(dims.batch * dims.in_ch * dims.len);
        std::vector<double> W(dims.out_ch * dims.in_ch * dims.kernel);
        std::vector<double> b(dims.out_ch, 0.05);
        for (double& v : X) v = unit(crng);
        for (double& v : W) v = unit(crng);

        std::vector<double> ys, yo;
        const double ts = time_ms([&] { k::serial::conv1d_forward(dims, X, W, b, ys); }, reps);
        const double to = time_ms([&] { k::omp::conv1d_forward(dims, X, W, b, yo); }, reps);
        report("conv1d_forward", ts, to, bits_equal(ys, yo));

        std::vector<double> dY(dims.batch * dims.out_ch * dims.out_len());
        for (double& v : dY) v = unit(crng);
        std::vector<double> dxs, dxo;
        const double ts2 =
            time_ms([&] { k::serial::conv1d_grad_input(dims, dY, W, dxs); }, reps);
        const double to2 = time_ms([&] { k::omp::conv1d_grad_input(dims, dY, W, dxo); }, reps);
        report("conv1d_grad_input", ts2, to2, bits_equal(dxs, dxo));

        std::vector<double> dws, dwo, dbs, dbo;
        const double ts3 =
            time_ms([&] { k::serial::conv1d_grad_params(dims, X, dY, dws, dbs); }, reps);
        const double to3 =
            time_ms([&] { k::omp::conv1d_grad_params(dims, X, dY, dwo, dbo); }, reps);
        report("conv1d_grad_params", ts3, to3, bits_equal(dws, dwo) && bits_equal(dbs, dbo));
    }

    return 0;
}
