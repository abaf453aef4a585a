#include "modseq/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "modseq/errors.hpp"
#include "modseq/rng.hpp"

namespace modseq {

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::quasistatic ? "quasistatic" : "one_over_f";
}

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "quasistatic") return NoiseKind::quasistatic;
    if (s == "one_over_f" || s == "1/f") return NoiseKind::one_over_f;
    throw ConfigError("unknown noise kind '" + s + "' (expected quasistatic or one_over_f)");
}

std::vector<PauliIndexPair> all_pauli_channels() {
    std::vector<PauliIndexPair> out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != 0 || j != 0) out.push_back({i, j});
    return out;
}

std::vector<PauliIndexPair> two_local_channels() {
    std::vector<PauliIndexPair> out;
    for (int i = 1; i < 4; ++i)
        for (int j = 1; j < 4; ++j) out.push_back({i, j});
    return out;
}

void NoiseConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("noise config: " + msg); };
    if (!(sigma_nonlocal >= 0.0) || !(sigma_local >= 0.0)) fail("sigmas must be >= 0");
    if (!(gate_time_T > 0.0)) fail("gate_time_T must be > 0");
    if (!(nu_min > 0.0) || !(nu_min < nu_max)) fail("need 0 < nu_min < nu_max");
    if (n_fluctuators < 1) fail("n_fluctuators must be >= 1");
    if (!std::isfinite(alpha)) fail("alpha must be finite");
    if (channels.empty()) fail("channel list is empty");
    for (const auto& ch : channels) {
        if (ch.i < 0 || ch.i > 3 || ch.j < 0 || ch.j > 3) fail("channel index outside 0..3");
        if (ch.i == 0 && ch.j == 0) fail("identity channel (0,0) is not a noise channel");
    }
    auto sorted = channels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("duplicate channel");
}

NoiseConfig NoiseConfig::quasistatic_default() {
    NoiseConfig c;
    c.kind = NoiseKind::quasistatic;
    c.sigma_nonlocal = 0.13;
    c.sigma_local = 0.0;
    return c;
}

NoiseConfig NoiseConfig::one_over_f_default() {
    NoiseConfig c;
    c.kind = NoiseKind::one_over_f;
    c.sigma_nonlocal = 0.2;
    c.sigma_local = 0.006;
    c.alpha = 0.7;
    c.n_fluctuators = 10;
    c.nu_min = 1.0 / (2.0 * (10.0 * c.gate_time_T));
    c.nu_max = 1.0 / (2.0 * (c.gate_time_T / 10.0));
    return c;
}

void to_json(nlohmann::json& j, const NoiseConfig& c) {
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& ch : c.channels) channels.push_back({ch.i, ch.j});
    j = nlohmann::json{
        {"schema_version", NoiseConfig::kSchemaVersion},
        {"kind", to_string(c.kind)},
        {"sigma_nonlocal", c.sigma_nonlocal},
        {"sigma_local", c.sigma_local},
        {"alpha", c.alpha},
        {"gate_time_T", c.gate_time_T},
        {"n_fluctuators", c.n_fluctuators},
        {"nu_min", c.nu_min},
        {"nu_max", c.nu_max},
        {"channels", channels},
        {"local_trace_mode", c.local_trace_mode == LocalTraceMode::independent ? "independent" : "shared"},
        {"seed", c.seed},
    };
}

void from_json(const nlohmann::json& j, NoiseConfig& c) {
    try {
        if (!j.is_object()) throw ConfigError("noise config must be a JSON object");
        const int version = j.value("schema_version", NoiseConfig::kSchemaVersion);
        if (version != NoiseConfig::kSchemaVersion) {
            throw ConfigError("unsupported noise config schema_version " + std::to_string(version));
        }
        NoiseConfig out = j.contains("kind") && noise_kind_from_string(j.at("kind").get<std::string>()) ==
                                                    NoiseKind::one_over_f
                              ? NoiseConfig::one_over_f_default()
                              : NoiseConfig::quasistatic_default();
        out.sigma_nonlocal = j.value("sigma_nonlocal", out.sigma_nonlocal);
        out.sigma_local = j.value("sigma_local", out.sigma_local);
        out.alpha = j.value("alpha", out.alpha);
        if (j.contains("gate_time_T")) {
            out.gate_time_T = j.at("gate_time_T").get<double>();
            out.nu_min = 1.0 / (2.0 * (10.0 * out.gate_time_T));
            out.nu_max = 1.0 / (2.0 * (out.gate_time_T / 10.0));
        }
        out.n_fluctuators = j.value("n_fluctuators", out.n_fluctuators);
        out.nu_min = j.value("nu_min", out.nu_min);
        out.nu_max = j.value("nu_max", out.nu_max);
        if (j.contains("channels")) {
            out.channels.clear();
            for (const auto& ch : j.at("channels")) {
                if (!ch.is_array() || ch.size() != 2) throw ConfigError("channel entries must be [i, j] pairs");
                out.channels.push_back({ch[0].get<int>(), ch[1].get<int>()});
            }
        }
        if (j.contains("local_trace_mode")) {
            const auto mode = j.at("local_trace_mode").get<std::string>();
            if (mode == "independent") out.local_trace_mode = LocalTraceMode::independent;
            else if (mode == "shared") out.local_trace_mode = LocalTraceMode::shared;
            else throw ConfigError("local_trace_mode must be 'independent' or 'shared'");
        }
        out.seed = j.value("seed", out.seed);
        c = std::move(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("noise config: ") + e.what());
    }
}

Eigen::Matrix4cd NoiseRealization::noise_generator(int segment) const {
    Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const double coeff = delta_at(segment, k);
        if (coeff != 0.0) h += coeff * pauli_product(channels[k]);
    }
    return h;
}

NoiseRealization NoiseRealization::zero(int segment_count, std::vector<PauliIndexPair> channels) {
    NoiseRealization r;
    r.segment_count = segment_count;
    r.channels = std::move(channels);
    r.delta.assign(static_cast<std::size_t>(segment_count) * r.channels.size(), 0.0);
    r.delta_eta.assign(6 * static_cast<std::size_t>(segment_count), 0.0);
    return r;
}

double rtn_switching_rate(double nu) { return kPi * nu; }

RtnTrace generate_rtn(double switching_rate, double horizon, std::mt19937_64& rng) {
    RtnTrace trace;
    trace.switching_rate = switching_rate;
    trace.horizon = horizon;
    std::bernoulli_distribution coin(0.5);
    trace.initial_state = coin(rng) ? 1 : -1;
    std::exponential_distribution<double> gap(switching_rate);
    double t = gap(rng);
    while (t <= horizon) {
        trace.switch_times.push_back(t);
        t += gap(rng);
    }
    return trace;
}

int rtn_value(const RtnTrace& trace, double t) {
    if (!(t >= 0.0 && t <= trace.horizon)) {
        std::ostringstream os;
        os << "rtn_value: t = " << t << " outside [0, " << trace.horizon << "]";
        throw std::out_of_range(os.str());
    }
    const auto switches = std::upper_bound(trace.switch_times.begin(), trace.switch_times.end(), t) -
                          trace.switch_times.begin();
    return (switches % 2 == 0) ? trace.initial_state : -trace.initial_state;
}

std::vector<double> fluctuator_rates(const NoiseConfig& config) {
    std::vector<double> rates(static_cast<std::size_t>(config.n_fluctuators));
    if (config.n_fluctuators == 1) {
        rates[0] = std::sqrt(config.nu_min * config.nu_max);
        return rates;
    }
    const double lo = std::log(config.nu_min);
    const double hi = std::log(config.nu_max);
    for (int k = 0; k < config.n_fluctuators; ++k) {
        rates[static_cast<std::size_t>(k)] = std::exp(lo + (hi - lo) * k / (config.n_fluctuators - 1));
    }
    return rates;
}

std::vector<double> fluctuator_weights(const NoiseConfig& config) {
    const auto rates = fluctuator_rates(config);
    std::vector<double> w(rates.size());
    double norm2 = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
        w[k] = std::pow(rates[k], 0.5 * (1.0 - config.alpha));
        norm2 += w[k] * w[k];
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& x : w) x *= scale;
    return w;
}

std::vector<double> sample_fluctuator_sum(const NoiseConfig& config, double sigma, std::span<const double> times,
                                          double horizon, std::mt19937_64& rng) {
    const auto rates = fluctuator_rates(config);
    const auto weights = fluctuator_weights(config);
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t k = 0; k < rates.size(); ++k) {
        const RtnTrace trace = generate_rtn(rtn_switching_rate(rates[k]), horizon, rng);
        // Walk the switch list once; times are sorted.
        std::size_t next = 0;
        int state = trace.initial_state;
        for (std::size_t i = 0; i < times.size(); ++i) {
            while (next < trace.switch_times.size() && trace.switch_times[next] <= times[i]) {
                state = -state;
                ++next;
            }
            out[i] += weights[k] * state;
        }
    }
    for (double& x : out) x *= sigma;
    return out;
}

NoiseRealization sample_quasistatic(const NoiseConfig& config, int segment_count, std::mt19937_64& rng) {
    if (config.kind != NoiseKind::quasistatic) throw ConfigError("sample_quasistatic: config kind is not quasistatic");
    if (segment_count < 1) throw ConfigError("segment count must be >= 1");
    NoiseRealization r = NoiseRealization::zero(segment_count, config.channels);
    std::normal_distribution<double> nonlocal(0.0, 1.0);
    const std::size_t nch = config.channels.size();
    for (std::size_t k = 0; k < nch; ++k) {
        const double value = config.sigma_nonlocal * nonlocal(rng);
        for (int n = 0; n < segment_count; ++n) r.delta[static_cast<std::size_t>(n) * nch + k] = value;
    }
    for (double& eta : r.delta_eta) eta = config.sigma_local * nonlocal(rng);
    return r;
}

NoiseRealization sample_one_over_f(const NoiseConfig& config, int segment_count, std::mt19937_64& rng) {
    if (config.kind != NoiseKind::one_over_f) throw ConfigError("sample_one_over_f: config kind is not one_over_f");
    if (segment_count < 1) throw ConfigError("segment count must be >= 1");
    NoiseRealization r = NoiseRealization::zero(segment_count, config.channels);

    // One sampling instant per segment, shared by every channel of this world.
    const double T = config.gate_time_T;
    std::vector<double> times(static_cast<std::size_t>(segment_count));
    for (int n = 0; n < segment_count; ++n) {
        std::uniform_real_distribution<double> in_segment(n * T / segment_count, (n + 1) * T / segment_count);
        times[static_cast<std::size_t>(n)] = in_segment(rng);
    }

    const std::size_t nch = config.channels.size();
    for (std::size_t k = 0; k < nch; ++k) {
        const auto values = sample_fluctuator_sum(config, config.sigma_nonlocal, times, T, rng);
        for (int n = 0; n < segment_count; ++n) {
            r.delta[static_cast<std::size_t>(n) * nch + k] = values[static_cast<std::size_t>(n)];
        }
    }

    if (config.local_trace_mode == LocalTraceMode::independent) {
        for (int slot = 0; slot < 6; ++slot) {
            const auto values = sample_fluctuator_sum(config, config.sigma_local, times, T, rng);
            for (int n = 0; n < segment_count; ++n) {
                r.delta_eta[6 * static_cast<std::size_t>(n) + slot] = values[static_cast<std::size_t>(n)];
            }
        }
    } else {
        const auto values = sample_fluctuator_sum(config, config.sigma_local, times, T, rng);
        for (int n = 0; n < segment_count; ++n) {
            for (int slot = 0; slot < 6; ++slot) {
                r.delta_eta[6 * static_cast<std::size_t>(n) + slot] = values[static_cast<std::size_t>(n)];
            }
        }
    }
    return r;
}

NoiseRealization sample_realization(const NoiseConfig& config, int segment_count, std::mt19937_64& rng) {
    return config.kind == NoiseKind::quasistatic ? sample_quasistatic(config, segment_count, rng)
                                                 : sample_one_over_f(config, segment_count, rng);
}

std::vector<NoiseRealization> make_ensemble(const NoiseConfig& config, int segment_count, int members,
                                            std::uint64_t ensemble_seed) {
    config.validate();
    if (members < 1) throw ConfigError("ensemble size must be >= 1");
    std::vector<NoiseRealization> out;
    out.reserve(static_cast<std::size_t>(members));
    for (int m = 0; m < members; ++m) {
        auto rng = substream(ensemble_seed, static_cast<std::uint64_t>(m));
        out.push_back(sample_realization(config, segment_count, rng));
    }
    return out;
}

std::vector<double> perturb_angles(std::span<const double> angles, std::span<const double> delta_eta) {
    if (angles.size() != delta_eta.size()) {
        throw std::invalid_argument("perturb_angles: angle and error vectors differ in length");
    }
    std::vector<double> out(angles.size());
    for (std::size_t i = 0; i < angles.size(); ++i) out[i] = angles[i] * (1.0 + delta_eta[i]);
    return out;
}

double estimate_local_fidelity(double sigma_local, int n_coeff_sets, int n_angle_sets, std::mt19937_64& rng) {
    if (n_coeff_sets < 1 || n_angle_sets < 1) throw std::invalid_argument("estimate_local_fidelity: counts must be >= 1");
    std::uniform_real_distribution<double> angle(-4.0 * kPi, 4.0 * kPi);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<std::array<double, 6>> angle_sets(static_cast<std::size_t>(n_angle_sets));
    for (auto& set : angle_sets)
        for (double& a : set) a = angle(rng);
    std::vector<std::array<double, 6>> coeff_sets(static_cast<std::size_t>(n_coeff_sets));
    for (auto& set : coeff_sets)
        for (double& d : set) d = sigma_local * normal(rng);

    double total = 0.0;
    for (const auto& a : angle_sets) {
        const Unitary4 ideal = local_rotation(EulerAngles::from_array(a));
        double row = 0.0;
        for (const auto& d : coeff_sets) {
            std::array<double, 6> perturbed{};
            for (int i = 0; i < 6; ++i) perturbed[i] = a[i] * (1.0 + d[i]);
            if (perturbed == a) {
                row += 1.0;
                continue;
            }
            row += trace_fidelity(ideal, local_rotation(EulerAngles::from_array(perturbed)));
        }
        total += row / n_coeff_sets;
    }
    return total / n_angle_sets;
}

}  // namespace modseq
