#include "evcharge/queues.hpp"

#include <algorithm>
#include <stdexcept>

namespace evc {

namespace {
void require_nonneg(double v, const char* name) {
    if (v < 0.0) throw std::invalid_argument(std::string("queue update: ") + name + " must be >= 0");
}
} // namespace

double update_q(double q, double y_kwh, double lambda_arriving_kwh, double eps_c) {
    require_nonneg(q, "q");
    require_nonneg(y_kwh, "y");
    require_nonneg(lambda_arriving_kwh, "lambda");
    require_nonneg(eps_c, "eps_c");
    return std::max(q - eps_c * y_kwh, 0.0) + lambda_arriving_kwh;
}

double update_z(double z, double q, double y_kwh, double eta, double eps_c) {
    require_nonneg(z, "z");
    require_nonneg(q, "q");
    require_nonneg(y_kwh, "y");
    require_nonneg(eta, "eta");
    require_nonneg(eps_c, "eps_c");
    return std::max(z + eta * q - eps_c * y_kwh, 0.0);
}

double update_b(double b, double soc, double target_soc, double mean_deadline_slot,
                double finish_slot, double b_max) {
    const double raw = b + (target_soc - soc) * (mean_deadline_slot - finish_slot);
    return std::clamp(raw, 0.0, b_max);
}

double drift_bound_q(double q, double y_kwh, double lambda_max_kwh, double eps_c) {
    const double service = eps_c * y_kwh;
    return service * service + lambda_max_kwh * lambda_max_kwh +
           2.0 * q * (lambda_max_kwh - service);
}

double drift_bound_z(double z, double q, double y_kwh, double eta, double eps_c) {
    const double net = eta * q - eps_c * y_kwh;
    return 2.0 * z * net + net * net;
}

double drift_bound_b(double b, double mean_deadline_slot, double finish_slot) {
    const double gap = mean_deadline_slot - finish_slot;
    return gap * gap + 2.0 * b * gap;
}

} // namespace evc
