#include "idselect/simworld.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "idselect/errors.hpp"
#include "idselect/rng.hpp"

namespace idselect {

namespace {

void validate_config(const WorldConfig& c) {
    if (c.identities < 2) throw ConfigError("world config: identities must be >= 2");
    if (c.samples_per_identity < 2)
        throw ConfigError("world config: samples_per_identity must be >= 2");
    if (c.frames_min < 1 || c.frames_max < c.frames_min)
        throw ConfigError("world config: frame range invalid");
    if (c.modalities.empty()) throw ConfigError("world config: no modalities");
    if (c.descriptor_dim <= static_cast<int>(c.modalities.size()))
        throw ConfigError("world config: descriptor_dim must exceed modality count");
    if (c.noise_sigma < 0.0 || c.frame_noise < 0.0)
        throw ConfigError("world config: noise scales must be non-negative");
    std::vector<std::string> mods = c.modalities;
    std::sort(mods.begin(), mods.end());
    if (std::adjacent_find(mods.begin(), mods.end()) != mods.end())
        throw ConfigError("world config: duplicate modality");
    const auto& q = c.quality;
    if (q.low > q.high || q.low < 0.0 || q.high > 1.0)
        throw ConfigError("world config: quality range invalid");
    if (q.band_low_lo > q.band_low_hi || q.band_high_lo > q.band_high_hi ||
        q.band_low_lo < 0.0 || q.band_high_hi > 1.0)
        throw ConfigError("world config: quality bands invalid");
}

std::map<std::string, double> draw_quality(const WorldConfig& cfg, int dominant_idx, Rng& rng) {
    std::map<std::string, double> q;
    const auto& qc = cfg.quality;
    switch (qc.mode) {
    case QualityMode::Uniform:
        for (const auto& m : cfg.modalities) q[m] = rng.uniform(qc.low, qc.high);
        break;
    case QualityMode::Dominant:
        dominant_idx = static_cast<int>(rng.below(cfg.modalities.size()));
        [[fallthrough]];
    case QualityMode::DominantIdentity:
        for (size_t i = 0; i < cfg.modalities.size(); ++i) {
            bool good = static_cast<int>(i) == dominant_idx;
            q[cfg.modalities[i]] = good ? rng.uniform(qc.band_high_lo, qc.band_high_hi)
                                        : rng.uniform(qc.band_low_lo, qc.band_low_hi);
        }
        break;
    }
    return q;
}

} // namespace

World generate_world(uint64_t seed, const WorldConfig& config) {
    validate_config(config);
    World world;
    world.seed = seed;
    world.config = config;

    const int d = config.descriptor_dim;
    const int n_mod = static_cast<int>(config.modalities.size());
    const int id_dim = d - n_mod;

    for (int id = 0; id < config.identities; ++id) {
        Rng id_rng(mix_seed(seed, fnv1a64("identity"), static_cast<uint64_t>(id)));
        Vec identity_emb(id_dim);
        for (auto& v : identity_emb) v = id_rng.gaussian();
        int dominant_idx = static_cast<int>(id_rng.below(config.modalities.size()));

        for (int s = 0; s < config.samples_per_identity; ++s) {
            Rng rng(mix_seed(seed, fnv1a64("sample"), static_cast<uint64_t>(id),
                             static_cast<uint64_t>(s)));
            SequenceSample sample;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "id%04d_s%02d", id, s);
            sample.sample_id = buf;
            sample.identity = id;
            sample.quality = draw_quality(config, dominant_idx, rng);

            int frame_count = config.frames_min +
                              static_cast<int>(rng.below(config.frames_max - config.frames_min + 1));
            sample.frames.reserve(frame_count);
            for (int t = 0; t < frame_count; ++t) {
                Vec frame(d);
                for (int i = 0; i < id_dim; ++i)
                    frame[i] = identity_emb[i] + config.frame_noise * rng.gaussian();
                for (int m = 0; m < n_mod; ++m)
                    frame[id_dim + m] = sample.quality.at(config.modalities[m]) +
                                        config.frame_noise * rng.gaussian();
                sample.frames.push_back(std::move(frame));
            }
            world.samples.push_back(std::move(sample));
        }
    }
    return world;
}

double similarity_oracle(const World& world, const ModelSpec& model, const PairSample& pair) {
    auto pq = pair.probe->quality.find(model.modality);
    auto gq = pair.gallery->quality.find(model.modality);
    if (pq == pair.probe->quality.end() || gq == pair.gallery->quality.end())
        throw InvalidPairError("pair lacks quality for modality '" + model.modality + "'");

    uint64_t eps_seed = mix_seed(world.seed, fnv1a64(pair.probe->sample_id),
                                 fnv1a64(pair.gallery->sample_id), fnv1a64(model.id));
    Rng rng(eps_seed);
    double eps = world.config.noise_sigma * rng.gaussian();

    if (pair.label == 1) {
        double q_eff = std::min(pq->second, gq->second);
        return std::tanh(world.config.gain * model.discriminability * q_eff + eps);
    }
    return std::tanh(eps);
}

std::vector<PairSample> make_pairs(const World& world, int n, double positive_fraction,
                                   uint64_t seed) {
    if (n == 0) return {};
    if (n < 0) throw ConfigError("make_pairs: n must be non-negative");
    if (!(positive_fraction > 0.0 && positive_fraction < 1.0))
        throw ConfigError("make_pairs: positive_fraction must be in (0,1)");

    // identity -> sample indices
    std::vector<std::vector<int>> by_identity(world.identity_count());
    for (size_t i = 0; i < world.samples.size(); ++i)
        by_identity[world.samples[i].identity].push_back(static_cast<int>(i));

    Rng rng(mix_seed(seed, fnv1a64("pairs")));
    int n_pos = static_cast<int>(std::llround(n * positive_fraction));

    std::vector<PairSample> pairs;
    pairs.reserve(n);
    for (int i = 0; i < n_pos; ++i) {
        int id = static_cast<int>(rng.below(by_identity.size()));
        const auto& group = by_identity[id];
        int a = static_cast<int>(rng.below(group.size()));
        int b = static_cast<int>(rng.below(group.size() - 1));
        if (b >= a) ++b; // distinct samples
        pairs.push_back({&world.samples[group[a]], &world.samples[group[b]], 1});
    }
    for (int i = n_pos; i < n; ++i) {
        int a = static_cast<int>(rng.below(world.samples.size()));
        int b = static_cast<int>(rng.below(world.samples.size()));
        while (world.samples[b].identity == world.samples[a].identity)
            b = static_cast<int>(rng.below(world.samples.size()));
        pairs.push_back({&world.samples[a], &world.samples[b], 0});
    }
    // Fisher-Yates so positives are not front-loaded in batches.
    for (size_t i = pairs.size(); i > 1; --i) {
        size_t j = rng.below(i);
        std::swap(pairs[i - 1], pairs[j]);
    }
    return pairs;
}

namespace {

const char* quality_mode_name(QualityMode m) {
    switch (m) {
    case QualityMode::Uniform: return "uniform";
    case QualityMode::Dominant: return "dominant";
    case QualityMode::DominantIdentity: return "dominant_identity";
    }
    return "uniform";
}

QualityMode quality_mode_from_name(const std::string& s) {
    if (s == "uniform") return QualityMode::Uniform;
    if (s == "dominant") return QualityMode::Dominant;
    if (s == "dominant_identity") return QualityMode::DominantIdentity;
    throw ConfigError("unknown quality mode '" + s + "'");
}

nlohmann::json config_to_json(const WorldConfig& c) {
    return nlohmann::json{
        {"identities", c.identities},
        {"samples_per_identity", c.samples_per_identity},
        {"frames_min", c.frames_min},
        {"frames_max", c.frames_max},
        {"descriptor_dim", c.descriptor_dim},
        {"modalities", c.modalities},
        {"quality",
         {{"mode", quality_mode_name(c.quality.mode)},
          {"low", c.quality.low},
          {"high", c.quality.high},
          {"band_high_lo", c.quality.band_high_lo},
          {"band_high_hi", c.quality.band_high_hi},
          {"band_low_lo", c.quality.band_low_lo},
          {"band_low_hi", c.quality.band_low_hi}}},
        {"noise_sigma", c.noise_sigma},
        {"gain", c.gain},
        {"frame_noise", c.frame_noise},
    };
}

void reject_unknown_keys(const nlohmann::json& j, const std::vector<const char*>& known,
                         const char* where) {
    for (const auto& item : j.items())
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return item.key() == k;
            }) == known.end())
            throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
}

WorldConfig config_from_json(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"identities", "samples_per_identity", "frames_min", "frames_max",
                         "descriptor_dim", "modalities", "quality", "noise_sigma", "gain",
                         "frame_noise"},
                        "world config");
    WorldConfig c;
    c.identities = j.value("identities", c.identities);
    c.samples_per_identity = j.value("samples_per_identity", c.samples_per_identity);
    c.frames_min = j.value("frames_min", c.frames_min);
    c.frames_max = j.value("frames_max", c.frames_max);
    c.descriptor_dim = j.value("descriptor_dim", c.descriptor_dim);
    if (j.contains("modalities")) c.modalities = j.at("modalities").get<std::vector<std::string>>();
    if (j.contains("quality")) {
        const auto& q = j.at("quality");
        reject_unknown_keys(q,
                            {"mode", "low", "high", "band_high_lo", "band_high_hi",
                             "band_low_lo", "band_low_hi"},
                            "world config quality");
        c.quality.mode = quality_mode_from_name(q.value("mode", "uniform"));
        c.quality.low = q.value("low", c.quality.low);
        c.quality.high = q.value("high", c.quality.high);
        c.quality.band_high_lo = q.value("band_high_lo", c.quality.band_high_lo);
        c.quality.band_high_hi = q.value("band_high_hi", c.quality.band_high_hi);
        c.quality.band_low_lo = q.value("band_low_lo", c.quality.band_low_lo);
        c.quality.band_low_hi = q.value("band_low_hi", c.quality.band_low_hi);
    }
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.gain = j.value("gain", c.gain);
    c.frame_noise = j.value("frame_noise", c.frame_noise);
    return c;
}

} // namespace

std::string world_to_json(const World& world) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : world.samples) {
        samples.push_back({{"sample_id", s.sample_id},
                           {"identity", s.identity},
                           {"quality", s.quality},
                           {"frames", s.frames}});
    }
    nlohmann::json doc{{"version", 1},
                       {"seed", world.seed},
                       {"config", config_to_json(world.config)},
                       {"samples", std::move(samples)}};
    return doc.dump(1);
}

World world_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("world snapshot: ") + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1)
            throw ConfigError("world snapshot: unsupported version");
        World world;
        world.seed = doc.at("seed").get<uint64_t>();
        world.config = config_from_json(doc.at("config"));
        for (const auto& js : doc.at("samples")) {
            SequenceSample s;
            s.sample_id = js.at("sample_id").get<std::string>();
            s.identity = js.at("identity").get<int>();
            s.quality = js.at("quality").get<std::map<std::string, double>>();
            s.frames = js.at("frames").get<std::vector<Vec>>();
            world.samples.push_back(std::move(s));
        }
        return world;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("world snapshot: ") + e.what());
    }
}

void save_world(const World& world, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write world snapshot '" + path + "'");
    out << world_to_json(world);
    out << '\n';
}

World load_world(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open world snapshot '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return world_from_json(buf.str());
}

WorldConfig world_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("world config: ") + e.what());
    }
    try {
        WorldConfig c = config_from_json(doc);
        validate_config(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("world config: ") + e.what());
    }
}

WorldConfig load_world_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open world config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return world_config_from_json(buf.str());
}

} // namespace idselect
