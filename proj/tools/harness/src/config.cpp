#include "harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "revive/errors.hpp"

namespace harness {

namespace {

// Reads known keys from one JSON object and rejects everything else.
class Section {
public:
    Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigError(where() + " must be an object");
    }

    template <typename T>
    Section& get(const char* key, T& out) {
        seen_.insert(key);
        auto it = doc_.find(key);
        if (it == doc_.end()) return *this;
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw ConfigError(where(key) + " must be a boolean");
            } else if constexpr (std::is_integral_v<T>) {
                if (!it->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (it->is_number_integer() && !it->is_number_unsigned()) {
                        throw ConfigError(where(key) + " must be non-negative");
                    }
                }
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!it->is_number()) throw ConfigError(where(key) + " must be a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw ConfigError(where(key) + " must be a string");
            }
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
        return *this;
    }

    template <typename Fn>
    Section& child(const char* key, Fn&& fn) {
        seen_.insert(key);
        auto it = doc_.find(key);
        if (it != doc_.end()) {
            Section sub(*it, where(key));
            fn(sub);
            sub.finish();
        }
        return *this;
    }

    void finish() const {
        for (const auto& [key, value] : doc_.items()) {
            if (!seen_.contains(key)) throw ConfigError("unknown config key " + where(key));
        }
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

revive::sde::SdeSchedule ScheduleConfig::build() const {
    return revive::sde::SdeSchedule::make(steps, kappa, revive::sde::parse_profile(profile),
                                          alpha_scale);
}

RunConfig merge_config(RunConfig c, const json& doc) {
    Section root(doc, "");
    root.get("command", c.command).get("seed", c.seed).get("bins", c.bins);
    root.child("schedule", [&](Section& s) {
        s.get("steps", c.schedule.steps)
            .get("kappa", c.schedule.kappa)
            .get("profile", c.schedule.profile)
            .get("alpha_scale", c.schedule.alpha_scale);
    });
    root.child("network", [&](Section& s) {
        s.get("depth", c.network.depth)
            .get("base_channels", c.network.base_channels)
            .get("blocks_per_level", c.network.blocks_per_level)
            .get("time_embed_dim", c.network.time_embed_dim)
            .get("coarse_group_width", c.network.coarse_group_width)
            .get("ln_eps", c.network.ln_eps);
    });
    root.child("loss", [&](Section& s) {
        s.get("lambda1", c.loss.lambda1).get("lambda2", c.loss.lambda2).get("lambda3", c.loss.lambda3);
    });
    root.child("canny", [&](Section& s) {
        s.get("sigma", c.canny.sigma).get("t_low", c.canny.t_low).get("t_high", c.canny.t_high);
    });
    root.child("degradation", [&](Section& s) {
        auto& d = c.degradation;
        s.get("tag", d.tag)
            .get("gain", d.gain)
            .get("gamma", d.gamma)
            .get("noise_std", d.noise_std)
            .get("transmission", d.transmission)
            .get("airlight", d.airlight)
            .get("streaks", d.streaks)
            .get("angle", d.angle)
            .get("intensity", d.intensity);
    });
    root.child("train", [&](Section& s) {
        auto& t = c.train;
        s.get("iterations", t.iterations)
            .get("batch", t.batch)
            .get("learning_rate", t.learning_rate)
            .get("size", t.size)
            .get("train_pairs", t.train_pairs)
            .get("learned_weights", t.learned_weights);
    });
    root.child("restore", [&](Section& s) {
        s.get("pairs", c.restore.pairs).get("stochastic", c.restore.stochastic);
    });
    root.child("roundtrip", [&](Section& s) {
        s.get("size", c.roundtrip.size).get("stochastic", c.roundtrip.stochastic);
    });
    root.child("probe", [&](Section& s) {
        s.get("dilations", c.probe.dilations)
            .get("channels", c.probe.channels)
            .get("grad_trials", c.probe.grad_trials);
    });
    root.child("gen_data", [&](Section& s) {
        s.get("count", c.gen_data.count).get("size", c.gen_data.size);
    });
    root.child("paths", [&](Section& s) {
        auto& p = c.paths;
        s.get("input", p.input)
            .get("reference", p.reference)
            .get("checkpoint", p.checkpoint)
            .get("resume", p.resume)
            .get("out", p.out)
            .get("report", p.report);
    });
    root.finish();
    return c;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return merge_config(std::move(base), doc);
}

void RunConfig::validate() const {
    require(schedule.steps >= 1, "schedule.steps must be >= 1");
    require(schedule.kappa > 0.0 && std::isfinite(schedule.kappa), "schedule.kappa must be positive");
    require(schedule.alpha_scale > 0.0, "schedule.alpha_scale must be positive");
    try {
        (void)revive::sde::parse_profile(schedule.profile);
        network.validate();
        loss.validate();
        canny.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    require(bins >= 1, "bins must be >= 1");
    const auto& d = degradation;
    require(d.tag == "lowlight" || d.tag == "haze" || d.tag == "rain",
            "degradation.tag must be lowlight, haze or rain");
    require(d.gain > 0.0 && d.gamma > 0.0 && d.noise_std >= 0.0,
            "degradation: gain and gamma must be positive, noise_std >= 0");
    require(d.transmission >= 0.0 && d.transmission <= 1.0 && d.airlight >= 0.0 && d.airlight <= 1.0,
            "degradation: transmission and airlight must lie in [0, 1]");
    require(d.streaks >= 0 && d.intensity >= 0.0, "degradation: streaks and intensity must be >= 0");
    require(train.iterations >= 0, "train.iterations must be >= 0");
    require(train.batch >= 1, "train.batch must be >= 1");
    require(train.learning_rate >= 0.0, "train.learning_rate must be >= 0");
    require(train.train_pairs >= 1, "train.train_pairs must be >= 1");
    const int multiple = 1 << network.depth;
    require(train.size >= multiple && train.size % multiple == 0,
            "train.size must be a positive multiple of 2^network.depth");
    require(restore.pairs >= 1, "restore.pairs must be >= 1");
    require(roundtrip.size >= 1, "roundtrip.size must be >= 1");
    require(probe.channels >= 2 && probe.channels % 2 == 0, "probe.channels must be even");
    for (int d2 : probe.dilations) require(d2 >= 1, "probe.dilations must be positive");
    require(probe.grad_trials >= 1, "probe.grad_trials must be >= 1");
    require(gen_data.count >= 1 && gen_data.size >= 1, "gen_data.count and size must be >= 1");
}

json to_json(const RunConfig& c) {
    return json{
        {"command", c.command},
        {"seed", c.seed},
        {"bins", c.bins},
        {"schedule",
         {{"steps", c.schedule.steps},
          {"kappa", c.schedule.kappa},
          {"profile", c.schedule.profile},
          {"alpha_scale", c.schedule.alpha_scale}}},
        {"network",
         {{"depth", c.network.depth},
          {"base_channels", c.network.base_channels},
          {"blocks_per_level", c.network.blocks_per_level},
          {"time_embed_dim", c.network.time_embed_dim},
          {"coarse_group_width", c.network.coarse_group_width},
          {"ln_eps", c.network.ln_eps}}},
        {"loss", {{"lambda1", c.loss.lambda1}, {"lambda2", c.loss.lambda2}, {"lambda3", c.loss.lambda3}}},
        {"canny", {{"sigma", c.canny.sigma}, {"t_low", c.canny.t_low}, {"t_high", c.canny.t_high}}},
        {"degradation",
         {{"tag", c.degradation.tag},
          {"gain", c.degradation.gain},
          {"gamma", c.degradation.gamma},
          {"noise_std", c.degradation.noise_std},
          {"transmission", c.degradation.transmission},
          {"airlight", c.degradation.airlight},
          {"streaks", c.degradation.streaks},
          {"angle", c.degradation.angle},
          {"intensity", c.degradation.intensity}}},
        {"train",
         {{"iterations", c.train.iterations},
          {"batch", c.train.batch},
          {"learning_rate", c.train.learning_rate},
          {"size", c.train.size},
          {"train_pairs", c.train.train_pairs},
          {"learned_weights", c.train.learned_weights}}},
        {"restore", {{"pairs", c.restore.pairs}, {"stochastic", c.restore.stochastic}}},
        {"roundtrip", {{"size", c.roundtrip.size}, {"stochastic", c.roundtrip.stochastic}}},
        {"probe",
         {{"dilations", c.probe.dilations},
          {"channels", c.probe.channels},
          {"grad_trials", c.probe.grad_trials}}},
        {"gen_data", {{"count", c.gen_data.count}, {"size", c.gen_data.size}}},
        {"paths",
         {{"input", c.paths.input},
          {"reference", c.paths.reference},
          {"checkpoint", c.paths.checkpoint},
          {"resume", c.paths.resume},
          {"out", c.paths.out},
          {"report", c.paths.report}}},
    };
}

}  // namespace harness
