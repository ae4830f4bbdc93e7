#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "idselect/linalg.hpp"
#include "idselect/pool.hpp"

namespace idselect {

// One synthetic "video": per-frame descriptor vectors plus the per-modality
// quality that drove their generation. Descriptors carry the quality signal
// so the agent can learn quality-conditioned selection.
struct SequenceSample {
    std::string sample_id;
    int identity = 0;
    std::vector<Vec> frames;               // T vectors, each of dimension d
    std::map<std::string, double> quality; // modality -> [0, 1]
};

struct PairSample {
    const SequenceSample* probe = nullptr;
    const SequenceSample* gallery = nullptr;
    int label = 0; // 1 iff same identity
};

// How per-sample modality quality is drawn:
//   uniform          - every modality independently U(low, high)
//   dominant         - one modality per sample is informative, rest degraded
//   dominant_identity- the informative modality is fixed per identity, with
//                      per-sample jitter inside the high/low bands
enum class QualityMode { Uniform, Dominant, DominantIdentity };

struct QualityConfig {
    QualityMode mode = QualityMode::Uniform;
    double low = 0.0;
    double high = 1.0;
    double band_high_lo = 0.7; // informative band (dominant modes)
    double band_high_hi = 1.0;
    double band_low_lo = 0.0;  // degraded band
    double band_low_hi = 0.25;
};

struct WorldConfig {
    int identities = 50;
    int samples_per_identity = 4;
    int frames_min = 6;
    int frames_max = 10;
    int descriptor_dim = 16;
    std::vector<std::string> modalities = {"face", "gait", "body"};
    QualityConfig quality;
    double noise_sigma = 0.25;  // similarity oracle noise scale
    double gain = 2.0;          // similarity oracle gain
    double frame_noise = 0.05;  // descriptor clutter scale
};

struct World {
    uint64_t seed = 0;
    WorldConfig config;
    std::vector<SequenceSample> samples;

    int identity_count() const { return config.identities; }
};

// Deterministic generation: identical (seed, config) yields a bit-identical
// world. Descriptor layout per frame: [identity embedding (d - |M| dims),
// one quality scalar per modality in config order] + Gaussian clutter.
World generate_world(uint64_t seed, const WorldConfig& config);

// Synthetic similarity law replacing frozen-backbone cosine similarity:
//   matched:     tanh(gain * discriminability * q_eff + eps)
//   non-matched: tanh(eps)
// with q_eff = min(probe quality, gallery quality) for the model's modality
// and eps ~ N(0, noise_sigma^2) keyed by (world seed, pair ids, model id).
// Repeated calls with the same arguments return the same value.
double similarity_oracle(const World& world, const ModelSpec& model, const PairSample& pair);

// n pairs with round(n * positive_fraction) positives; probe != gallery
// sample for positives; deterministic given seed.
std::vector<PairSample> make_pairs(const World& world, int n, double positive_fraction,
                                   uint64_t seed);

// Versioned JSON snapshot for exact replay; doubles round-trip bit-exactly.
std::string world_to_json(const World& world);
World world_from_json(const std::string& text);
void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);

WorldConfig world_config_from_json(const std::string& text);
WorldConfig load_world_config(const std::string& path);

} // namespace idselect
