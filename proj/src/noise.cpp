#include "spde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "spde/detail/gauss_legendre.hpp"
#include "spde/error.hpp"

namespace spde {

namespace {

using Vec = std::vector<double>;

double overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Overlap length of [alo,ahi] and [blo+z, bhi+z] as a function of z = x - y.
struct AxisWeight {
    double alo, ahi, blo, bhi;
    double operator()(double z) const { return overlap(alo, ahi, blo + z, bhi + z); }
};

// int_{A x B} |x-y|^{-alpha} in d >= 2, rewritten as int w(z)|z|^{-alpha} dz
// with w the product of per-axis overlap lengths. The z-domain is cut at the
// kinks of w and at 0, so the singularity only ever sits at a box corner;
// corner boxes are integrated through the scaling identity of homogeneous
// integrands.
class RieszBoxIntegral {
  public:
    RieszBoxIntegral(double alpha, std::vector<AxisWeight> axes)
        : alpha_(alpha), axes_(std::move(axes)), d_(axes_.size()) {}

    double integrate() const {
        std::vector<Vec> cuts(d_);
        for (std::size_t i = 0; i < d_; ++i) {
            const auto& a = axes_[i];
            Vec pts = {a.alo - a.bhi, a.alo - a.blo, a.ahi - a.bhi, a.ahi - a.blo};
            const double zmin = a.alo - a.bhi;
            const double zmax = a.ahi - a.blo;
            if (zmin < 0.0 && zmax > 0.0) pts.push_back(0.0);
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            cuts[i] = pts;
        }
        double total = 0.0;
        Vec lo(d_), hi(d_);
        // Iterate over the product of intervals.
        std::vector<std::size_t> idx(d_, 0);
        while (true) {
            bool empty = false;
            for (std::size_t i = 0; i < d_; ++i) {
                if (cuts[i].size() < 2) { empty = true; break; }
                lo[i] = cuts[i][idx[i]];
                hi[i] = cuts[i][idx[i] + 1];
            }
            if (empty) return 0.0;
            total += piece(lo, hi);
            std::size_t axis = 0;
            while (axis < d_) {
                if (++idx[axis] + 1 < cuts[axis].size()) break;
                idx[axis] = 0;
                ++axis;
            }
            if (axis == d_) break;
        }
        return total;
    }

  private:
    double weight(const Vec& z) const {
        double w = 1.0;
        for (std::size_t i = 0; i < d_; ++i) w *= axes_[i](z[i]);
        return w;
    }

    double piece(const Vec& lo, const Vec& hi) const {
        bool corner = true;
        for (std::size_t i = 0; i < d_; ++i) {
            if (lo[i] != 0.0 && hi[i] != 0.0) corner = false;
        }
        return corner ? corner_box(lo, hi) : regular(lo, hi, 0);
    }

    double gauss(const Vec& lo, const Vec& hi) const {
        const auto& rule = detail::unit_gauss_legendre<16>();
        const std::size_t m = rule.nodes.size();
        std::vector<std::size_t> k(d_, 0);
        Vec z(d_);
        double sum = 0.0;
        while (true) {
            double w = 1.0;
            double r2 = 0.0;
            for (std::size_t i = 0; i < d_; ++i) {
                z[i] = lo[i] + (hi[i] - lo[i]) * rule.nodes[k[i]];
                w *= rule.weights[k[i]] * (hi[i] - lo[i]);
                r2 += z[i] * z[i];
            }
            sum += w * weight(z) * std::pow(r2, -0.5 * alpha_);
            std::size_t axis = 0;
            while (axis < d_) {
                if (++k[axis] < m) break;
                k[axis] = 0;
                ++axis;
            }
            if (axis == d_) break;
        }
        return sum;
    }

    double regular(const Vec& lo, const Vec& hi, int depth) const {
        double dist2 = 0.0, diam2 = 0.0;
        for (std::size_t i = 0; i < d_; ++i) {
            const double c = std::clamp(0.0, lo[i], hi[i]);
            dist2 += c * c;
            diam2 += (hi[i] - lo[i]) * (hi[i] - lo[i]);
        }
        if (dist2 >= diam2 || depth >= 8) return gauss(lo, hi);
        double sum = 0.0;
        Vec clo(d_), chi(d_);
        for (std::size_t mask = 0; mask < (std::size_t{1} << d_); ++mask) {
            for (std::size_t i = 0; i < d_; ++i) {
                const double mid = 0.5 * (lo[i] + hi[i]);
                clo[i] = (mask >> i) & 1u ? mid : lo[i];
                chi[i] = (mask >> i) & 1u ? hi[i] : mid;
            }
            sum += regular(clo, chi, depth + 1);
        }
        return sum;
    }

    // Box with the origin as one corner. Reflect onto [0,h]^d, expand the
    // multilinear weight into monomials u^m (m in {0,1}^d) and use
    // I_m(R) = J_m / (1 - 2^{-(d - alpha + |m|)}), J_m being the integral
    // over R minus its half-size corner copy.
    double corner_box(const Vec& lo, const Vec& hi) const {
        Vec h(d_), c(d_), s(d_);
        for (std::size_t i = 0; i < d_; ++i) {
            const bool positive = hi[i] > 0.0;
            h[i] = positive ? hi[i] : -lo[i];
            const double sign = positive ? 1.0 : -1.0;
            const double w0 = axes_[i](0.0);
            const double w1 = axes_[i](sign * h[i]);
            c[i] = w0;
            s[i] = (w1 - w0) / h[i];
        }
        const std::size_t n_mono = std::size_t{1} << d_;
        Vec j(n_mono, 0.0);
        const auto& rule = detail::unit_gauss_legendre<16>();
        const std::size_t m = rule.nodes.size();
        Vec u(d_);
        for (std::size_t child = 1; child < n_mono; ++child) {
            std::vector<std::size_t> k(d_, 0);
            while (true) {
                double w = 1.0, r2 = 0.0;
                for (std::size_t i = 0; i < d_; ++i) {
                    const double half = 0.5 * h[i];
                    const double base = (child >> i) & 1u ? half : 0.0;
                    u[i] = base + half * rule.nodes[k[i]];
                    w *= rule.weights[k[i]] * half;
                    r2 += u[i] * u[i];
                }
                const double f = w * std::pow(r2, -0.5 * alpha_);
                for (std::size_t mono = 0; mono < n_mono; ++mono) {
                    double p = 1.0;
                    for (std::size_t i = 0; i < d_; ++i) {
                        if ((mono >> i) & 1u) p *= u[i];
                    }
                    j[mono] += f * p;
                }
                std::size_t axis = 0;
                while (axis < d_) {
                    if (++k[axis] < m) break;
                    k[axis] = 0;
                    ++axis;
                }
                if (axis == d_) break;
            }
        }
        double total = 0.0;
        for (std::size_t mono = 0; mono < n_mono; ++mono) {
            double coef = 1.0;
            int degree = 0;
            for (std::size_t i = 0; i < d_; ++i) {
                if ((mono >> i) & 1u) {
                    coef *= s[i];
                    ++degree;
                } else {
                    coef *= c[i];
                }
            }
            if (coef == 0.0) continue;
            const double homog = static_cast<double>(d_) - alpha_ + degree;
            total += coef * j[mono] / (1.0 - std::pow(2.0, -homog));
        }
        return total;
    }

    double alpha_;
    std::vector<AxisWeight> axes_;
    std::size_t d_;
};

bool is_white(const TimeKernel& k) { return k.kind == TimeKernel::Kind::white; }
bool is_white(const SpaceKernel& k) { return k.kind == SpaceKernel::Kind::white; }

} // namespace

void NoiseSpec::validate(std::size_t d) const {
    switch (time.kind) {
    case TimeKernel::Kind::white: break;
    case TimeKernel::Kind::fractional:
        if (!(time.hurst > 0.5 && time.hurst < 1.0)) {
            throw DomainError("fractional time kernel requires H in (1/2,1)");
        }
        break;
    case TimeKernel::Kind::radial_spectral:
        if (!(time.exponent > -1.0)) throw DomainError("time spectral exponent must exceed -1");
        break;
    }
    const double dd = static_cast<double>(d);
    switch (space.kind) {
    case SpaceKernel::Kind::white: break;
    case SpaceKernel::Kind::riesz:
        if (!(space.alpha > 0.0 && space.alpha < dd)) {
            throw DomainError("Riesz kernel requires alpha in (0,d)");
        }
        break;
    case SpaceKernel::Kind::radial_spectral:
        if (!(space.exponent > -dd)) throw DomainError("space spectral exponent must exceed -d");
        break;
    }
}

std::string NoiseSpec::describe() const {
    std::ostringstream os;
    switch (time.kind) {
    case TimeKernel::Kind::white: os << "white"; break;
    case TimeKernel::Kind::fractional: os << "fractional(H=" << time.hurst << ")"; break;
    case TimeKernel::Kind::radial_spectral: os << "spectral(" << time.exponent << ")"; break;
    }
    os << " x ";
    switch (space.kind) {
    case SpaceKernel::Kind::white: os << "white"; break;
    case SpaceKernel::Kind::riesz: os << "riesz(alpha=" << space.alpha << ")"; break;
    case SpaceKernel::Kind::radial_spectral: os << "spectral(" << space.exponent << ")"; break;
    }
    return os.str();
}

double fbm_covariance(double hurst, double t, double s) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fbm_covariance: H must lie in (0,1)");
    if (t < 0.0 || s < 0.0) throw DomainError("fbm_covariance: times must be >= 0");
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double time_cell_covariance(const TimeKernel& kernel, double a0, double a1, double b0, double b1) {
    switch (kernel.kind) {
    case TimeKernel::Kind::white: return overlap(a0, a1, b0, b1);
    case TimeKernel::Kind::fractional: {
        const double h = kernel.hurst;
        if (!(h > 0.5 && h < 1.0)) throw DomainError("fractional time kernel requires H in (1/2,1)");
        // K'' = |z|^{2H-2}
        const auto anti = [h](double z) {
            return std::pow(std::abs(z), 2.0 * h) / (2.0 * h * (2.0 * h - 1.0));
        };
        return anti(a1 - b0) + anti(a0 - b1) - anti(a1 - b1) - anti(a0 - b0);
    }
    case TimeKernel::Kind::radial_spectral: break;
    }
    throw CapabilityError("cell covariance is not available for spectral time kernels");
}

double space_cell_covariance(const SpaceKernel& kernel, const Vec& a_lo, const Vec& a_hi,
                             const Vec& b_lo, const Vec& b_hi) {
    const std::size_t d = a_lo.size();
    if (a_hi.size() != d || b_lo.size() != d || b_hi.size() != d) {
        throw ShapeError("space_cell_covariance: box dimensions differ");
    }
    if (d == 0) return 1.0;
    switch (kernel.kind) {
    case SpaceKernel::Kind::white: {
        double v = 1.0;
        for (std::size_t i = 0; i < d; ++i) v *= overlap(a_lo[i], a_hi[i], b_lo[i], b_hi[i]);
        return v;
    }
    case SpaceKernel::Kind::riesz: {
        const double a = kernel.alpha;
        if (!(a > 0.0 && a < static_cast<double>(d))) {
            throw DomainError("Riesz kernel requires alpha in (0,d)");
        }
        if (d == 1) {
            // K'' = |z|^{-alpha}
            const auto anti = [a](double z) {
                return std::pow(std::abs(z), 2.0 - a) / ((1.0 - a) * (2.0 - a));
            };
            return anti(a_hi[0] - b_lo[0]) + anti(a_lo[0] - b_hi[0]) - anti(a_hi[0] - b_hi[0]) -
                   anti(a_lo[0] - b_lo[0]);
        }
        std::vector<AxisWeight> axes;
        for (std::size_t i = 0; i < d; ++i) axes.push_back({a_lo[i], a_hi[i], b_lo[i], b_hi[i]});
        return RieszBoxIntegral(a, std::move(axes)).integrate();
    }
    case SpaceKernel::Kind::radial_spectral: break;
    }
    throw CapabilityError("cell covariance is not available for spectral space kernels");
}

double cell_covariance(const CellBox& a, const CellBox& b, const NoiseSpec& spec) {
    if (a.lo.size() != a.hi.size() || b.lo.size() != b.hi.size() || a.lo.size() != b.lo.size()) {
        throw ShapeError("cell_covariance: cell dimensions differ");
    }
    spec.validate(std::max<std::size_t>(a.lo.size(), 1));
    return time_cell_covariance(spec.time, a.t0, a.t1, b.t0, b.t1) *
           space_cell_covariance(spec.space, a.lo, a.hi, b.lo, b.hi);
}

CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& covariance) {
    const auto n = covariance.rows();
    if (n != covariance.cols()) throw ShapeError("cholesky: matrix not square");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
    const double scale = covariance.trace() / static_cast<double>(n);
    for (double eps = 1e-14; eps <= 1e-10 * (1.0 + 1e-12); eps *= 2.0) {
        Eigen::MatrixXd jittered = covariance;
        jittered.diagonal().array() += eps * scale;
        llt.compute(jittered);
        if (llt.info() == Eigen::Success) return {llt.matrixL(), eps};
    }
    throw NumericalError("Cholesky factorization failed after maximal jitter 1e-10 * trace/n");
}

Path sample_bm_path(const TimeGrid& grid, const RngStream& rng) {
    const std::size_t n = grid.n_steps();
    Path p{grid, std::vector<double>(n + 1, 0.0)};
    std::vector<double> z(n);
    rng.fill_normal(z, 0);
    const double sd = std::sqrt(grid.dt());
    for (std::size_t k = 0; k < n; ++k) p.values[k + 1] = p.values[k] + sd * z[k];
    return p;
}

Field sample_white_noise_sheet(const SpaceTimeGrid& grid, const RngStream& rng) {
    Field f(grid, Field::Layout::cells);
    auto& v = f.values();
    rng.fill_normal(v, 0);
    const double sd = std::sqrt(grid.time().dt() * grid.cell_volume());
    for (double& x : v) x *= sd;
    return f;
}

FbmSampler::FbmSampler(double hurst, TimeGrid grid, std::size_t cap)
    : hurst_(hurst), grid_(grid) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fBm requires H in (0,1)");
    const std::size_t n = grid.n_steps();
    if (n > cap) throw CapabilityError("fBm grid exceeds Cholesky cap");
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            cov(i, j) = cov(j, i) = fbm_covariance(hurst, grid.node(i + 1), grid.node(j + 1));
        }
    }
    auto chol = cholesky_with_jitter(cov);
    lower_ = std::move(chol.lower);
    jitter_ = chol.jitter;
}

Path FbmSampler::sample(const RngStream& rng) const {
    const std::size_t n = grid_.n_steps();
    Eigen::VectorXd z(n);
    rng.fill_normal({z.data(), n}, 0);
    Eigen::VectorXd b = lower_.triangularView<Eigen::Lower>() * z;
    Path p{grid_, std::vector<double>(n + 1, 0.0)};
    for (std::size_t k = 0; k < n; ++k) p.values[k + 1] = b[static_cast<Eigen::Index>(k)];
    return p;
}

Path sample_fbm_path(double hurst, const TimeGrid& grid, const RngStream& rng, std::size_t cap) {
    return FbmSampler(hurst, grid, cap).sample(rng);
}

HomogeneousNoiseSampler::HomogeneousNoiseSampler(SpaceTimeGrid grid, NoiseSpec spec,
                                                 std::size_t cap)
    : grid_(grid), spec_(spec) {
    spec_.validate(grid.dim());
    const std::size_t nt = grid.time().n_steps();
    const std::size_t ns = grid.spatial_size();
    if (nt > cap || ns > cap) {
        throw CapabilityError("homogeneous noise grid exceeds Cholesky cap");
    }
    const double dt = grid.time().dt();
    time_white_ = is_white(spec_.time);
    space_white_ = is_white(spec_.space);

    time_cov_.resize(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nt));
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = time_cell_covariance(spec_.time, i * dt, (i + 1) * dt, j * dt,
                                                  (j + 1) * dt);
            time_cov_(i, j) = time_cov_(j, i) = v;
        }
    }

    // Spatial covariance depends on the offset between cells only.
    const std::size_t d = grid.dim();
    const double dx = grid.dx();
    std::map<std::vector<long>, double> by_offset;
    space_cov_.resize(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
    for (std::size_t p = 0; p < ns; ++p) {
        const auto ip = grid.unflatten(p);
        for (std::size_t q = 0; q <= p; ++q) {
            const auto iq = grid.unflatten(q);
            std::vector<long> off(d);
            for (std::size_t a = 0; a < d; ++a) {
                off[a] = std::labs(static_cast<long>(ip[a]) - static_cast<long>(iq[a]));
            }
            auto it = by_offset.find(off);
            if (it == by_offset.end()) {
                Vec alo(d, 0.0), ahi(d, dx), blo(d), bhi(d);
                for (std::size_t a = 0; a < d; ++a) {
                    blo[a] = static_cast<double>(off[a]) * dx;
                    bhi[a] = blo[a] + dx;
                }
                it = by_offset.emplace(off, space_cell_covariance(spec_.space, alo, ahi, blo, bhi))
                         .first;
            }
            space_cov_(p, q) = space_cov_(q, p) = it->second;
        }
    }

    if (!time_white_) time_lower_ = cholesky_with_jitter(time_cov_).lower;
    if (!space_white_) space_lower_ = cholesky_with_jitter(space_cov_).lower;
}

Field HomogeneousNoiseSampler::sample(const RngStream& rng) const {
    const auto nt = static_cast<Eigen::Index>(grid_.time().n_steps());
    const auto ns = static_cast<Eigen::Index>(grid_.spatial_size());
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMatrix z(nt, ns);
    rng.fill_normal({z.data(), static_cast<std::size_t>(z.size())}, 0);

    RowMatrix w;
    if (time_white_) {
        w = z * std::sqrt(time_cov_(0, 0));
    } else {
        w = time_lower_.triangularView<Eigen::Lower>() * z;
    }
    if (space_white_) {
        w *= std::sqrt(space_cov_(0, 0));
    } else {
        w = w * space_lower_.transpose().triangularView<Eigen::Upper>();
    }
    Field f(grid_, Field::Layout::cells);
    std::copy(w.data(), w.data() + w.size(), f.values().begin());
    return f;
}

Field sample_homogeneous_noise(const SpaceTimeGrid& grid, const NoiseSpec& spec,
                               const RngStream& rng, std::size_t cap) {
    return HomogeneousNoiseSampler(grid, spec, cap).sample(rng);
}

} // namespace spde
