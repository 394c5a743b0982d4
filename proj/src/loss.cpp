#include "marginpursuit/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace marginpursuit {

double psi(double u) noexcept {
    if (u > kSqrt2) return kPsiBound;
    if (u < -kSqrt2) return -kPsiBound;
    return u - u * u * u / 6.0;
}

double rho(double u) noexcept {
    const double a = std::fabs(u);
    if (a <= kSqrt2) {
        const double a2 = a * a;
        return a2 / 2.0 - a2 * a2 / 24.0;
    }
    return a * kPsiBound - 0.5;
}

double rho_second(double u) noexcept {
    if (std::fabs(u) <= kSqrt2) return 1.0 - u * u / 2.0;
    return 0.0;
}

ScaledLoss::ScaledLoss(double s, double gamma) : s_(s), gamma_(gamma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("loss: scale s must be positive and finite");
    }
    if (!std::isfinite(gamma)) throw std::invalid_argument("loss: gamma must be finite");
}

double surrogate_phi(double u, const ScaledLoss& loss) noexcept {
    const double s = loss.s();
    return s * s * rho((loss.gamma() - u) / s);
}

double LinearModel::norm() const { return std::sqrt(kernels::dot(w, w)); }

double LinearModel::score(std::span<const double> x) const {
    if (x.size() != w.size()) throw std::invalid_argument("model: dimension mismatch");
    return kernels::dot(w, x);
}

namespace {

void check_shapes(const LinearModel& model, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("objective: empty dataset");
    if (model.dim() != data.dim()) {
        throw std::invalid_argument("objective: model dimension " + std::to_string(model.dim()) +
                                    " does not match data dimension " + std::to_string(data.dim()));
    }
}

// (gamma - m_i)/s in place over the margins.
void to_residuals(std::vector<double>& m, const ScaledLoss& loss) {
    const double g = loss.gamma();
    const double s = loss.s();
    for (double& v : m) v = (g - v) / s;
}

}  // namespace

std::vector<double> margins(const LinearModel& model, const Dataset& data) {
    if (model.dim() != data.dim()) throw std::invalid_argument("margins: dimension mismatch");
    std::vector<double> out(data.size());
    kernels::active().margins(data.features().data(), data.labels().data(), model.w.data(), out.data(),
                              data.size(), data.dim());
    return out;
}

double objective(const LinearModel& model, const Dataset& data, const ScaledLoss& loss) {
    check_shapes(model, data);
    const auto& k = kernels::active();
    std::vector<double> r = margins(model, data);
    to_residuals(r, loss);
    k.rho(r.data(), r.data(), r.size());
    const double s = loss.s();
    return s * s * k.sum(r.data(), r.size()) / static_cast<double>(data.size());
}

std::vector<double> objective_gradient(const LinearModel& model, const Dataset& data, const ScaledLoss& loss) {
    check_shapes(model, data);
    const auto& k = kernels::active();
    std::vector<double> r = margins(model, data);
    to_residuals(r, loss);
    k.psi(r.data(), r.data(), r.size());
    const double coef = -loss.s() / static_cast<double>(data.size());
    std::vector<double> grad(data.dim(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double c = coef * r[i] * data.label(i);
        if (c != 0.0) k.axpy(c, data.row(i).data(), grad.data(), grad.size());
    }
    return grad;
}

void accumulate_point_gradient(const LinearModel& model, std::span<const double> x, double y,
                               const ScaledLoss& loss, double scale, std::span<double> out) {
    const auto& k = kernels::active();
    const double m = y * k.dot(model.w.data(), x.data(), x.size());
    const double c = -scale * loss.s() * psi((loss.gamma() - m) / loss.s()) * y;
    if (c != 0.0) k.axpy(c, x.data(), out.data(), out.size());
}

}  // namespace marginpursuit
