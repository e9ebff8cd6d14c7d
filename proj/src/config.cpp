#include "m2spec/config.hpp"

#include <fstream>
#include <set>

#include "m2spec/error.hpp"

namespace m2spec {

using nlohmann::json;

namespace {

const json& need(const json& obj, const char* name, const std::string& key) {
    if (!obj.contains(name)) throw ConfigError(key + "." + name, "missing");
    return obj.at(name);
}

double as_double(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError(key, "expected a number");
    return j.get<double>();
}

std::uint64_t as_u64(const json& j, const std::string& key) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        if (j.get<std::int64_t>() < 0) throw ConfigError(key, "must be nonnegative");
        return j.get<std::uint64_t>();
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v < 0) throw ConfigError(key, "must be nonnegative");
        if (v != static_cast<double>(static_cast<std::uint64_t>(v))) throw ConfigError(key, "expected an integer");
        return static_cast<std::uint64_t>(v);
    }
    throw ConfigError(key, "expected an integer");
}

std::size_t as_size(const json& j, const std::string& key) { return static_cast<std::size_t>(as_u64(j, key)); }

bool as_bool(const json& j, const std::string& key) {
    if (!j.is_boolean()) throw ConfigError(key, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError(key, "expected a string");
    return j.get<std::string>();
}

cplx as_complex(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(key, "expected a number or a [re, im] pair");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [name, value] : obj.items())
        if (!allowed.contains(name)) throw ConfigError(prefix.empty() ? name : prefix + "." + name, "unknown key");
}

template <class F>
auto wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ConfigError(key, err.what());
    }
}

}  // namespace

RationalSection1D parse_section(const json& j, const std::string& key) {
    if (j.is_number()) return RationalSection1D::constant(j.get<double>());
    if (!j.is_object()) throw ConfigError(key, "expected a section object");
    const cplx pole = j.contains("pole") ? as_complex(j.at("pole"), key + ".pole") : cplx{};
    if (j.contains("num")) {
        reject_unknown(j, {"num", "pole", "row", "col"}, key);
        const auto& num = j.at("num");
        if (!num.is_array() || num.size() != 2) throw ConfigError(key + ".num", "expected [b0, b1]");
        return RationalSection1D::numerator(as_complex(num[0], key + ".num"), as_complex(num[1], key + ".num"), pole);
    }
    reject_unknown(j, {"zero", "pole", "gain", "row", "col"}, key);
    const cplx zero = as_complex(need(j, "zero", key), key + ".zero");
    const cplx gain = j.contains("gain") ? as_complex(j.at("gain"), key + ".gain") : cplx{1.0};
    return RationalSection1D::zero_pole_gain(zero, pole, gain);
}

MAKernel parse_kernel(const json& j, const std::string& key) {
    if (!j.is_object()) throw ConfigError(key, "expected an object");
    reject_unknown(j, {"d", "m", "p", "taps"}, key);
    const std::size_t d = as_size(need(j, "d", key), key + ".d");
    const std::size_t m = j.contains("m") ? as_size(j.at("m"), key + ".m") : 1;
    const std::size_t p = j.contains("p") ? as_size(j.at("p"), key + ".p") : m;
    return wrap(key, [&] {
        MAKernel kernel(d, m, p);
        const auto& taps = need(j, "taps", key);
        if (!taps.is_array()) throw ConfigError(key + ".taps", "expected a list");
        for (std::size_t i = 0; i < taps.size(); ++i) {
            const std::string tk = key + ".taps[" + std::to_string(i) + "]";
            const auto& tap = taps[i];
            if (!tap.is_object()) throw ConfigError(tk, "expected {sigma, matrix}");
            reject_unknown(tap, {"sigma", "matrix"}, tk);
            const auto& sig = need(tap, "sigma", tk);
            if (!sig.is_array() || sig.size() != d) throw ConfigError(tk + ".sigma", "expected d integers");
            std::vector<Index> comps;
            for (const auto& c : sig) {
                if (!c.is_number_integer()) throw ConfigError(tk + ".sigma", "expected integers");
                comps.push_back(c.get<Index>());
            }
            const auto& mat = need(tap, "matrix", tk);
            Eigen::MatrixXcd value(m, p);
            if (mat.is_number() || (mat.is_array() && mat.size() == 2 && mat[0].is_number() && m * p == 1)) {
                value(0, 0) = as_complex(mat, tk + ".matrix");
                if (m * p != 1) throw ConfigError(tk + ".matrix", "scalar tap for a matrix kernel");
            } else {
                if (!mat.is_array() || mat.size() != m) throw ConfigError(tk + ".matrix", "expected m rows");
                for (std::size_t a = 0; a < m; ++a) {
                    if (!mat[a].is_array() || mat[a].size() != p)
                        throw ConfigError(tk + ".matrix", "expected p columns per row");
                    for (std::size_t c = 0; c < p; ++c) value(a, c) = as_complex(mat[a][c], tk + ".matrix");
                }
            }
            kernel.add_tap(LagIndex(std::move(comps)), value);
        }
        return kernel;
    });
}

RadarModel parse_radar(const json& j, const std::string& key) {
    if (!j.is_object()) throw ConfigError(key, "expected an object");
    reject_unknown(j, {"rho", "omega", "lambda2"}, key);
    RadarModel model;
    auto triple = [&](const char* name, std::array<double, 3>& out) {
        if (!j.contains(name)) return;
        const auto& a = j.at(name);
        if (!a.is_array() || a.size() != 3) throw ConfigError(key + "." + name, "expected three numbers");
        for (std::size_t i = 0; i < 3; ++i) out[i] = as_double(a[i], key + "." + name);
    };
    model.rho = {0.3, 0.3, 0.3};
    triple("rho", model.rho);
    triple("omega", model.omega);
    model.lambda2 = j.contains("lambda2") ? as_double(j.at("lambda2"), key + ".lambda2") : 2.0;
    wrap(key, [&] {
        model.validate();
        return 0;
    });
    return model;
}

GraphicalModel parse_graphical_model(const json& j, const std::string& key) {
    if (j.is_string()) {
        if (j.get<std::string>() == "five-node") return five_node_benchmark_model();
        throw ConfigError(key, "unknown named model '" + j.get<std::string>() + "'");
    }
    if (!j.is_object()) throw ConfigError(key, "expected \"five-node\" or {size, entries}");
    reject_unknown(j, {"size", "entries"}, key);
    const std::size_t m = as_size(need(j, "size", key), key + ".size");
    return wrap(key, [&] {
        GraphicalModel model(m);
        const auto& entries = need(j, "entries", key);
        if (!entries.is_array()) throw ConfigError(key + ".entries", "expected a list");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::string ek = key + ".entries[" + std::to_string(i) + "]";
            const auto& e = entries[i];
            if (!e.is_object()) throw ConfigError(ek, "expected an object");
            const std::size_t row = as_size(need(e, "row", ek), ek + ".row");
            const std::size_t col = as_size(need(e, "col", ek), ek + ".col");
            if (row < 1 || col < 1) throw ConfigError(ek, "row and col are 1-based");
            model.set(row - 1, col - 1, parse_section(e, ek));
        }
        model.validate();
        return model;
    });
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
    reject_unknown(doc,
                   {"experiment", "N_list", "trials", "base_seed", "grid", "covariance", "estimators", "output_dir",
                    "impulse_taps", "horizon", "input_filter", "noise_ratio", "model", "threshold", "entry_norm",
                    "burn_in", "radar", "random_omega", "wrap_peak_error", "kernel", "noise"},
                   "");
    ExperimentConfig cfg;
    const std::string name = as_string(need(doc, "experiment", ""), "experiment");
    cfg.experiment = wrap("experiment", [&] { return parse_experiment(name); });

    const auto& nl = need(doc, "N_list", "");
    if (!nl.is_array()) throw ConfigError("N_list", "expected a list of sample sizes");
    for (const auto& v : nl) cfg.n_list.push_back(as_size(v, "N_list"));

    if (doc.contains("trials")) {
        const auto& t = doc.at("trials");
        if (!t.is_number_integer() && !t.is_number_unsigned()) throw ConfigError("trials", "expected an integer");
        if (t.get<std::int64_t>() < 1) throw ConfigError("trials", "must be positive");
        cfg.trials = t.get<std::size_t>();
    }
    if (doc.contains("base_seed")) cfg.base_seed = as_u64(doc.at("base_seed"), "base_seed");
    if (doc.contains("grid")) cfg.grid_points = as_size(doc.at("grid"), "grid");
    if (doc.contains("covariance")) {
        const auto kind = as_string(doc.at("covariance"), "covariance");
        if (kind == "biased")
            cfg.covariance = EstimatorKind::biased;
        else if (kind == "unbiased")
            cfg.covariance = EstimatorKind::unbiased;
        else
            throw ConfigError("covariance", "expected \"biased\" or \"unbiased\"");
    }
    if (doc.contains("estimators")) {
        const auto& list = doc.at("estimators");
        if (!list.is_array()) throw ConfigError("estimators", "expected a list");
        for (const auto& e : list) {
            if (e.is_string()) {
                cfg.estimators.push_back({e.get<std::string>(), e.get<std::string>()});
                continue;
            }
            if (!e.is_object()) throw ConfigError("estimators", "expected {label, method} objects");
            reject_unknown(e, {"label", "method"}, "estimators");
            cfg.estimators.push_back({as_string(need(e, "label", "estimators"), "estimators.label"),
                                      as_string(need(e, "method", "estimators"), "estimators.method")});
        }
    }
    if (doc.contains("output_dir")) cfg.output_dir = as_string(doc.at("output_dir"), "output_dir");

    if (doc.contains("impulse_taps")) cfg.impulse_taps = as_size(doc.at("impulse_taps"), "impulse_taps");
    if (doc.contains("horizon")) cfg.horizon = as_size(doc.at("horizon"), "horizon");
    if (doc.contains("input_filter")) cfg.input_filter = parse_section(doc.at("input_filter"), "input_filter");
    if (doc.contains("noise_ratio")) cfg.noise_ratio = as_double(doc.at("noise_ratio"), "noise_ratio");

    if (doc.contains("model")) cfg.graph_model = parse_graphical_model(doc.at("model"), "model");
    if (doc.contains("threshold")) cfg.threshold = as_double(doc.at("threshold"), "threshold");
    if (doc.contains("entry_norm"))
        cfg.entry_norm = wrap("entry_norm", [&] { return parse_entry_norm(as_string(doc.at("entry_norm"), "entry_norm")); });
    if (doc.contains("burn_in")) cfg.burn_in = as_size(doc.at("burn_in"), "burn_in");

    if (doc.contains("radar")) {
        cfg.radar = parse_radar(doc.at("radar"), "radar");
        if (doc.at("radar").contains("omega")) cfg.random_omega = false;
    }
    if (doc.contains("random_omega")) cfg.random_omega = as_bool(doc.at("random_omega"), "random_omega");
    if (doc.contains("wrap_peak_error")) cfg.wrap_peak_error = as_bool(doc.at("wrap_peak_error"), "wrap_peak_error");

    cfg.kernel = doc.contains("kernel") ? parse_kernel(doc.at("kernel"), "kernel") : default_consistency_kernel();
    if (doc.contains("noise")) {
        const auto kind = as_string(doc.at("noise"), "noise");
        if (kind == "real")
            cfg.noise = NoiseKind::real_gaussian;
        else if (kind == "circular")
            cfg.noise = NoiseKind::circular_complex;
        else
            throw ConfigError("noise", "expected \"real\" or \"circular\"");
    }

    cfg.validate();
    return cfg;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + err.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace m2spec
