#include "qsim/json_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace qsim {

namespace {

std::vector<Knot> knots_from_json(const nlohmann::json& j, double scale) {
    std::vector<Knot> out;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw std::invalid_argument("json: knot must be a [t, value] pair");
        out.push_back({pair[0].get<double>(), pair[1].get<double>() * scale});
    }
    return out;
}

nlohmann::json knots_to_json(const std::vector<Knot>& knots, double scale) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : knots) out.push_back({k.t, k.v * scale});
    return out;
}

}  // namespace

double round_sig(double v, int digits) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    const double mag = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(v))));
    return std::round(v * mag) / mag;
}

nlohmann::json register_to_json(const AtomRegister& reg) {
    nlohmann::json j;
    j["atoms"] = nlohmann::json::array();
    for (const auto& p : reg.positions) j["atoms"].push_back({p[0], p[1]});
    j["ancilla"] = nlohmann::json::array();
    for (std::size_t i = 0; i < reg.ancilla.size(); ++i)
        if (reg.ancilla[i]) j["ancilla"].push_back(i);
    if (!reg.label.empty()) j["label"] = reg.label;
    return j;
}

AtomRegister register_from_json(const nlohmann::json& j) {
    if (!j.contains("atoms")) throw std::invalid_argument("json: register needs \"atoms\"");
    std::vector<std::array<double, 2>> pos;
    for (const auto& a : j["atoms"]) {
        if (!a.is_array() || a.size() != 2)
            throw std::invalid_argument("json: atom must be an [x, y] pair");
        pos.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    std::vector<bool> anc(pos.size(), false);
    if (j.contains("ancilla"))
        for (const auto& i : j["ancilla"]) {
            const auto idx = i.get<std::size_t>();
            if (idx >= pos.size()) throw std::invalid_argument("json: ancilla index out of range");
            anc[idx] = true;
        }
    return AtomRegister(std::move(pos), std::move(anc), j.value("label", std::string{}));
}

nlohmann::json schedule_to_json(const PulseSchedule& s) {
    nlohmann::json j;
    j["omega"] = knots_to_json(s.omega, 1.0 / two_pi);
    j["delta"] = knots_to_json(s.delta, 1.0 / two_pi);
    j["phi"] = knots_to_json(s.phi, 1.0);
    return j;
}

PulseSchedule schedule_from_json(const nlohmann::json& j) {
    for (const char* key : {"omega", "delta"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("json: schedule needs \"") + key + "\"");
    auto omega = knots_from_json(j["omega"], two_pi);
    auto delta = knots_from_json(j["delta"], two_pi);
    if (omega.empty()) throw std::invalid_argument("json: empty omega track");
    const double T = omega.back().t;
    std::vector<Knot> phi = j.contains("phi") ? knots_from_json(j["phi"], 1.0)
                                              : std::vector<Knot>{{0.0, 0.0}, {T, 0.0}};
    return PulseSchedule(std::move(omega), std::move(delta), std::move(phi), T);
}

nlohmann::json histogram_to_json(const BitstringHistogram& h) {
    nlohmann::json j;
    j["n"] = h.n;
    j["shots"] = h.shots;
    nlohmann::json body;
    for (const auto& [b, v] : h.entries) {
        const std::string key = bitstring_to_string(b, h.n);
        if (h.exact())
            body[key] = round_sig(v);
        else
            body[key] = static_cast<std::uint64_t>(v);
    }
    j[h.exact() ? "probs" : "counts"] = std::move(body);
    return j;
}

BitstringHistogram histogram_from_json(const nlohmann::json& j) {
    BitstringHistogram h;
    h.n = j.at("n").get<int>();
    h.shots = j.value("shots", std::uint64_t{0});
    const bool exact = h.shots == 0;
    const char* key = exact ? "probs" : "counts";
    if (!j.contains(key))
        throw std::invalid_argument(std::string("json: histogram needs \"") + key + "\"");
    for (const auto& [bits, v] : j[key].items()) {
        if (static_cast<int>(bits.size()) != h.n)
            throw std::invalid_argument("json: histogram key length mismatch");
        h.entries[bitstring_from_string(bits)] = v.get<double>();
    }
    return h;
}

nlohmann::json profile_to_json(const DeviceProfile& p) {
    return {{"omega_max", p.omega_max / two_pi}, {"delta_min", p.delta_min / two_pi},
            {"delta_max", p.delta_max / two_pi}, {"t_max", p.t_max},
            {"min_ramp", p.min_ramp},           {"min_spacing", p.min_spacing},
            {"fov_width", p.fov_width},         {"fov_height", p.fov_height},
            {"c6", p.c6 / two_pi},              {"check_fov", p.check_fov}};
}

DeviceProfile profile_from_json(const nlohmann::json& j) {
    DeviceProfile d;
    d.omega_max = j.value("omega_max", d.omega_max / two_pi) * two_pi;
    d.delta_min = j.value("delta_min", d.delta_min / two_pi) * two_pi;
    d.delta_max = j.value("delta_max", d.delta_max / two_pi) * two_pi;
    d.t_max = j.value("t_max", d.t_max);
    d.min_ramp = j.value("min_ramp", d.min_ramp);
    d.min_spacing = j.value("min_spacing", d.min_spacing);
    d.fov_width = j.value("fov_width", d.fov_width);
    d.fov_height = j.value("fov_height", d.fov_height);
    d.c6 = j.value("c6", d.c6 / two_pi) * two_pi;
    d.check_fov = j.value("check_fov", d.check_fov);
    return d;
}

nlohmann::json fit_to_json(const FitResult& r) {
    // non-finite uncertainties (unbounded lifetime) serialize as explicit null
    auto num = [](double v) {
        return std::isfinite(v) ? nlohmann::json(round_sig(v)) : nlohmann::json(nullptr);
    };
    return {{"C", num(r.C)},
            {"A", num(r.A)},
            {"omega", num(r.omega / two_pi)},
            {"phi", num(r.phi)},
            {"tau", num(r.tau)},
            {"err_C", num(r.err_C)},
            {"err_A", num(r.err_A)},
            {"err_omega", num(r.err_omega / two_pi)},
            {"err_phi", num(r.err_phi)},
            {"err_tau", num(r.err_tau)},
            {"chi2", num(r.chi2)},
            {"dof", r.dof},
            {"chi2_per_dof", num(r.chi2_per_dof)},
            {"tau_unbounded", r.tau_unbounded}};
}

nlohmann::json optimization_to_json(const OptimizationResult& r) {
    nlohmann::json params = nlohmann::json::array();
    for (double v : r.best_params) params.push_back(round_sig(v));
    nlohmann::json trace = nlohmann::json::array();
    for (double v : r.trace) trace.push_back(round_sig(v));
    return {{"best_params", std::move(params)},
            {"best_objective", round_sig(r.best_objective)},
            {"trace", std::move(trace)},
            {"iterations", r.iterations},
            {"termination", r.termination},
            {"final_schedule", schedule_to_json(r.final_schedule)}};
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw io_error("write failed for " + path);
}

DeviceProfile active_profile() {
    const char* env = std::getenv("QSIM_PROFILE");
    if (env == nullptr || *env == '\0') return {};
    return profile_from_json(read_json_file(env));
}

}  // namespace qsim
