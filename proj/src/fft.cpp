#include <fftw3.h>

#include <mutex>
#include <numeric>
#include <utility>

#include "ltlab/errors.hpp"
#include "ltlab/grid.hpp"

namespace ltlab {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Fft::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

Fft::Fft(std::vector<int> dims) : plans_(std::make_unique<Plans>()) {
    if (dims.empty()) throw ConfigError("fft: empty shape");
    n_ = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
    std::vector<cplx> scratch(n_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->fwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p, p, FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p, p, FFTW_BACKWARD, flags);
    if (!plans_->fwd || !plans_->bwd) throw NumericError("fft: plan creation failed");
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<cplx> data) const {
    if (data.size() != n_) throw ConfigError("fft: size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_->fwd, p, p);
}

void Fft::backward(std::span<cplx> data) const {
    if (data.size() != n_) throw ConfigError("fft: size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_->bwd, p, p);
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= inv;
}

}  // namespace ltlab
