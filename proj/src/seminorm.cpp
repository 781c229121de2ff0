#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltlab/errors.hpp"
#include "ltlab/seminorm.hpp"

namespace ltlab {

namespace {

double unit_sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Lattice kernel |r|^{-d-2sigma} on the zero-padded grid (2n per axis), zero at the origin.
std::vector<cplx> padded_kernel(const BoxSpec& box, double sigma) {
    const int d = box.d;
    const double h = box.h();
    const double expo = -(d + 2.0 * sigma);
    std::vector<int> dims(d);
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        dims[a] = 2 * box.points[a];
        total *= dims[a];
    }
    std::vector<cplx> k(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        double r2 = 0.0;
        for (int a = d - 1; a >= 0; --a) {
            int j = static_cast<int>(rem % dims[a]);
            rem /= dims[a];
            if (j >= dims[a] / 2) j -= dims[a];
            r2 += static_cast<double>(j) * j;
        }
        k[i] = r2 == 0.0 ? 0.0 : std::pow(h * h * r2, 0.5 * expo);
    }
    return k;
}

// Periodised kernel on the n-grid: sum over all images, zero at the origin.
std::vector<cplx> periodic_kernel(const BoxSpec& box, double sigma) {
    const int d = box.d;
    const double h = box.h();
    const double L = box.length(0);
    const double expo = -(d + 2.0 * sigma);
    const int M = d == 1 ? 64 : (d == 2 ? 8 : 3);
    std::vector<cplx> k(box.size());
    // Images beyond the explicit block are replaced by their continuum integral.
    double tail = 0.0;
    if (d >= 2) {
        const double R = std::pow(std::pow((2.0 * M + 1.0) * L, d) / unit_ball_volume(d), 1.0 / d);
        tail = unit_sphere_area(d) * std::pow(R, -2.0 * sigma) / (2.0 * sigma) / std::pow(L, d);
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
        const auto ijk = box.unravel(i);
        std::array<double, 3> off{0.0, 0.0, 0.0};
        bool origin = true;
        for (int a = 0; a < d; ++a) {
            int j = ijk[a];
            if (j >= box.points[a] / 2) j -= box.points[a];
            off[a] = h * j;
            origin = origin && j == 0;
        }
        double acc = 0.0;
        std::array<int, 3> m{0, 0, 0};
        const int my = d >= 2 ? M : 0;
        const int mz = d >= 3 ? M : 0;
        for (m[0] = -M; m[0] <= M; ++m[0])
            for (m[1] = -my; m[1] <= my; ++m[1])
                for (m[2] = -mz; m[2] <= mz; ++m[2]) {
                    double r2 = 0.0;
                    for (int a = 0; a < d; ++a) {
                        const double x = off[a] + m[a] * L;
                        r2 += x * x;
                    }
                    if (r2 > 0.0) acc += std::pow(r2, 0.5 * expo);
                }
        if (d == 1) {
            const double edge = (M + 0.5) * L;
            acc += (std::pow(edge - off[0], -2.0 * sigma) + std::pow(edge + off[0], -2.0 * sigma)) /
                   (2.0 * sigma * L);
        } else {
            acc += tail;
        }
        k[i] = origin ? 0.0 : acc;
    }
    return k;
}

}  // namespace

struct DomainSeminorm::Impl {
    BoxSpec box;
    DomainMask omega;
    std::vector<std::pair<std::array<int, 3>, double>> alphas;
    bool periodic = false;
    // sigma > 0 only
    std::unique_ptr<Fft> fft;
    std::vector<cplx> kernel_hat;
    std::vector<double> conv_one;
    std::vector<std::size_t> cells;
    std::vector<std::size_t> padded_index;

    std::vector<double> restricted(const GridFunction& v) const {
        std::vector<double> out(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) out[c] = v.values[cells[c]].real();
        return out;
    }

    std::vector<cplx> convolve(const std::vector<cplx>& w_cells) const {
        std::vector<cplx> buf(fft->size(), cplx{0.0, 0.0});
        for (std::size_t c = 0; c < cells.size(); ++c) buf[padded_index[c]] = w_cells[c];
        fft->forward(buf);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= kernel_hat[i];
        fft->backward(buf);
        std::vector<cplx> out(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) out[c] = buf[padded_index[c]];
        return out;
    }
};

DomainSeminorm::DomainSeminorm(const BoxSpec& box, const SeminormSpec& spec, const DomainMask& omega)
    : impl_(std::make_unique<Impl>()), spec_(spec) {
    if (!(omega.box == box)) throw ConfigError("seminorm: mask box differs from function box");
    if (omega.empty()) throw ConfigError("empty domain");
    if (spec.sigma < 0.0 || spec.sigma >= 1.0) throw ConfigError("seminorm: sigma must lie in [0,1)");
    auto& im = *impl_;
    im.box = box;
    im.omega = omega;
    im.alphas = multi_indices(box.d, spec.m);
    for (std::size_t i = 0; i < omega.mask.size(); ++i)
        if (omega.mask[i]) im.cells.push_back(i);
    if (spec.sigma == 0.0) return;

    im.periodic = omega.is_full();
    std::vector<int> dims(box.points);
    std::vector<cplx> kernel;
    if (im.periodic) {
        kernel = periodic_kernel(box, spec.sigma);
        im.padded_index = im.cells;
    } else {
        for (auto& n : dims) n *= 2;
        kernel = padded_kernel(box, spec.sigma);
        im.padded_index.resize(im.cells.size());
        for (std::size_t c = 0; c < im.cells.size(); ++c) {
            const auto ijk = box.unravel(im.cells[c]);
            std::size_t idx = 0;
            for (int a = 0; a < box.d; ++a) idx = idx * dims[a] + static_cast<std::size_t>(ijk[a]);
            im.padded_index[c] = idx;
        }
    }
    im.fft = std::make_unique<Fft>(dims);
    im.fft->forward(kernel);
    im.kernel_hat = std::move(kernel);
    std::vector<cplx> ones(im.cells.size(), cplx{1.0, 0.0});
    const auto c1 = im.convolve(ones);
    im.conv_one.resize(c1.size());
    for (std::size_t c = 0; c < c1.size(); ++c) im.conv_one[c] = c1[c].real();
}

DomainSeminorm::~DomainSeminorm() = default;
DomainSeminorm::DomainSeminorm(DomainSeminorm&&) noexcept = default;
DomainSeminorm& DomainSeminorm::operator=(DomainSeminorm&&) noexcept = default;

double DomainSeminorm::value(const GridFunction& u) const {
    const auto& im = *impl_;
    if (!(u.box == im.box)) throw ConfigError("seminorm: function box differs from mask box");
    const double hd = im.box.cell_volume();
    double total = 0.0;
    for (const auto& [alpha, weight] : im.alphas) {
        const GridFunction du = derivative(u, alpha);
        if (spec_.sigma == 0.0) {
            double acc = 0.0;
            for (auto c : im.cells) acc += std::norm(du.values[c]);
            total += weight * acc * hd;
            continue;
        }
        std::vector<cplx> w(im.cells.size());
        for (std::size_t c = 0; c < im.cells.size(); ++c) w[c] = du.values[im.cells[c]];
        const auto kw = im.convolve(w);
        double diag = 0.0;
        double cross = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) {
            diag += std::norm(w[c]) * im.conv_one[c];
            cross += (std::conj(w[c]) * kw[c]).real();
        }
        total += weight * spec_.c_norm * hd * hd * 2.0 * (diag - cross);
    }
    return std::max(total, 0.0);
}

Eigen::MatrixXd DomainSeminorm::gram(std::span<const GridFunction> basis) const {
    const auto& im = *impl_;
    const std::size_t nb = basis.size();
    const double hd = im.box.cell_volume();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb, nb);
    for (const auto& [alpha, weight] : im.alphas) {
        Eigen::MatrixXd V(im.cells.size(), nb);
        for (std::size_t j = 0; j < nb; ++j) {
            if (!(basis[j].box == im.box)) throw ConfigError("seminorm: basis box differs from mask box");
            const auto r = im.restricted(derivative(basis[j], alpha));
            for (std::size_t c = 0; c < r.size(); ++c) V(c, j) = r[c];
        }
        if (spec_.sigma == 0.0) {
            A += weight * hd * (V.transpose() * V);
            continue;
        }
        Eigen::MatrixXd KV(im.cells.size(), nb);
        for (std::size_t j = 0; j < nb; ++j) {
            std::vector<cplx> w(im.cells.size());
            for (std::size_t c = 0; c < w.size(); ++c) w[c] = V(c, j);
            const auto kw = im.convolve(w);
            for (std::size_t c = 0; c < w.size(); ++c) KV(c, j) = kw[c].real();
        }
        Eigen::VectorXd c1 = Eigen::Map<const Eigen::VectorXd>(im.conv_one.data(), im.conv_one.size());
        Eigen::MatrixXd diag = V.transpose() * c1.asDiagonal() * V;
        Eigen::MatrixXd cross = V.transpose() * KV;
        cross = 0.5 * (cross + cross.transpose()).eval();
        A += weight * spec_.c_norm * hd * hd * 2.0 * (diag - cross);
    }
    return 0.5 * (A + A.transpose());
}

double seminorm_domain(const GridFunction& u, const SeminormSpec& spec, const DomainMask& omega) {
    if (omega.empty()) throw ConfigError("empty domain");
    return DomainSeminorm(u.box, spec, omega).value(u);
}

double ims_defect(const GridFunction& u, const GridFunction& chi, const SeminormSpec& spec,
                  const DomainMask& omega) {
    if (!(chi.box == u.box)) throw ConfigError("ims: chi box differs from u box");
    GridFunction cu(u.box), eu(u.box);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double c = chi.values[i].real();
        if (std::abs(chi.values[i].imag()) > 1e-12 || c < -1e-12 || c > 1.0 + 1e-12)
            throw ConfigError("ims: chi must take values in [0,1]");
        const double cc = std::clamp(c, 0.0, 1.0);
        cu.values[i] = cc * u.values[i];
        eu.values[i] = std::sqrt(std::max(0.0, 1.0 - cc * cc)) * u.values[i];
    }
    DomainSeminorm sn(u.box, spec, omega);
    return std::abs(sn.value(u) - sn.value(cu) - sn.value(eu));
}

double pair_kernel(double r, double h, double s) { return std::pow(std::max(r, 0.5 * h), -2.0 * s); }

double pair_density_energy(const BoxSpec& box, const std::vector<double>& ra, const std::vector<double>& rb, double s) {
    if (ra.size() != box.size() || rb.size() != box.size()) throw ConfigError("pair energy: density size mismatch");
    const int d = box.d;
    const double h = box.h();
    std::vector<int> padded(box.points.begin(), box.points.end());
    for (auto& p : padded) p *= 2;
    std::size_t np = 1;
    for (int p : padded) np *= static_cast<std::size_t>(p);
    std::vector<cplx> rho_a(np, 0.0), rho_b(np, 0.0), kern(np, 0.0);
    auto index = [&](const std::array<int, 3>& ijk) {
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * static_cast<std::size_t>(padded[a]) + static_cast<std::size_t>(ijk[a]);
        return idx;
    };
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const std::size_t j = index(box.unravel(i));
        rho_a[j] = ra[i];
        rho_b[j] = rb[i];
    }
    for (std::size_t i = 0; i < np; ++i) {
        std::array<int, 3> ijk{0, 0, 0};
        std::size_t rem = i;
        for (int a = d - 1; a >= 0; --a) {
            ijk[a] = static_cast<int>(rem % static_cast<std::size_t>(padded[a]));
            rem /= static_cast<std::size_t>(padded[a]);
        }
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const int k = ijk[a] <= padded[a] / 2 ? ijk[a] : ijk[a] - padded[a];
            r2 += (k * h) * (k * h);
        }
        kern[i] = pair_kernel(std::sqrt(r2), h, s);
    }
    Fft fft(padded);
    std::vector<cplx> conv = rho_b;
    fft.forward(conv);
    fft.forward(kern);
    for (std::size_t i = 0; i < np; ++i) conv[i] *= kern[i];
    fft.backward(conv);
    double acc = 0.0;
    for (std::size_t i = 0; i < np; ++i) acc += rho_a[i].real() * conv[i].real();
    const double hd = box.cell_volume();
    return acc * hd * hd;
}

}  // namespace ltlab
