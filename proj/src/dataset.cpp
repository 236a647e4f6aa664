#include "cogest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cogest/errors.hpp"
#include "cogest/rng.hpp"
#include "json.hpp"

namespace cogest::dataset {

namespace fs = std::filesystem;

const std::vector<std::string>& default_emotions() {
    static const std::vector<std::string> names = {"neutral", "happy", "angry", "sad"};
    return names;
}

void CorpusManifest::validate() const {
    if (emotions.empty()) throw ValidationError("manifest: empty emotion label set");
    for (size_t i = 0; i < emotions.size(); ++i)
        for (size_t j = i + 1; j < emotions.size(); ++j)
            if (emotions[i] == emotions[j])
                throw ValidationError("manifest: duplicate emotion label " + emotions[i]);
    double sum = 0.0;
    for (double f : split_fractions) {
        if (f < 0.0) throw ValidationError("manifest: negative split fraction");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("manifest: split fractions sum to " + std::to_string(sum));
    if (fps <= 0.0 || n_frames < 1 || n_joints < 1)
        throw ValidationError("manifest: non-positive fps, frame count, or joint count");
    for (const ClipRecord& rec : clips) {
        if (rec.id.empty()) throw ValidationError("manifest: record with empty id");
        if (rec.emotion < 0 || rec.emotion >= static_cast<int>(emotions.size()))
            throw ValidationError("manifest: clip " + rec.id + " has emotion index " +
                                  std::to_string(rec.emotion) + " outside the label set");
        if (rec.split != "train" && rec.split != "val" && rec.split != "test")
            throw ValidationError("manifest: clip " + rec.id + " has unknown split " + rec.split);
    }
}

std::vector<int> CorpusManifest::split_indices(const std::string& split) const {
    std::vector<int> out;
    for (size_t i = 0; i < clips.size(); ++i)
        if (clips[i].split == split) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<std::pair<int, int>> slice_clips(int take_length, int clip_len, int stride) {
    if (take_length < 0) throw ValidationError("slice_clips: negative take length");
    if (clip_len < 1 || stride < 1) throw ValidationError("slice_clips: non-positive window or stride");
    std::vector<std::pair<int, int>> out;
    for (int start = 0; start + clip_len <= take_length; start += stride)
        out.emplace_back(start, start + clip_len);
    return out;
}

namespace {

// Per-emotion style: carrier tone, arm-swing amplitude, and posture offsets.
struct EmotionStyle {
    double carrier_hz;
    double swing_amp;       // radians at the shoulder
    double spine_pitch;     // forward/back lean
    double head_pitch;      // nod offset
    double clavicle_lift;   // shrug
};

constexpr EmotionStyle kStyles[4] = {
    {220.0, 0.22, 0.00, 0.00, 0.00},    // neutral
    {440.0, 0.50, 0.05, 0.15, 0.05},    // happy
    {660.0, 0.80, -0.10, -0.05, 0.20},  // angry
    {110.0, 0.10, -0.30, -0.25, -0.05}, // sad
};

constexpr double kJitterSigma = 0.012;  // radians per joint per frame
constexpr const char* kWords[8] = {"beat", "tone", "step", "sway",
                                   "turn", "lift", "drop", "move"};

// One emotion index per take: an even cycle, or the 51:7:7:7 neutral-heavy mix
// allocated by largest remainder.
std::vector<int> assign_emotions(int n_takes, bool skewed) {
    std::vector<int> out(static_cast<size_t>(n_takes));
    if (!skewed) {
        for (int i = 0; i < n_takes; ++i) out[static_cast<size_t>(i)] = i % 4;
        return out;
    }
    const double w[4] = {51, 7, 7, 7};
    int counts[4];
    int assigned = 0;
    std::vector<std::pair<double, int>> frac;
    for (int e = 0; e < 4; ++e) {
        const double exact = n_takes * w[e] / 72.0;
        counts[e] = static_cast<int>(std::floor(exact));
        assigned += counts[e];
        frac.emplace_back(exact - counts[e], e);
    }
    std::sort(frac.begin(), frac.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (int i = 0; i < n_takes - assigned; ++i) ++counts[frac[static_cast<size_t>(i)].second];
    size_t pos = 0;
    for (int e = 0; e < 4; ++e)
        for (int i = 0; i < counts[e]; ++i) out[pos++] = e;
    return out;
}

// Elementary rotation about axis 0=x, 1=y, 2=z.
motion::Mat3 elem_rotation(int axis, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    switch (axis) {
        case 0: return {1, 0, 0, 0, c, -s, 0, s, c};
        case 1: return {c, 0, s, 0, 1, 0, -s, 0, c};
        default: return {c, -s, 0, s, c, 0, 0, 0, 1};
    }
}

struct TakeTracks {
    std::vector<double> samples;
    std::vector<double> beats;  // seconds
    std::vector<audio::WordSpan> words;
    Tensor poses;  // take_frames × (J·6)
};

TakeTracks synth_take(const SynthConfig& cfg, int emotion, Rng& rng) {
    const EmotionStyle& style = kStyles[emotion];
    const double dur = cfg.take_frames / cfg.fps;
    TakeTracks tk;

    const double period = rng.uniform(0.53, 0.67);
    const double phase = rng.uniform(0.25, 0.45);
    for (double t = phase; t < dur - 0.3; t += period) tk.beats.push_back(t);

    // Audio: emotion-coded carrier plus an overtone, gated by an amplitude
    // envelope that pulses at every beat, over a light noise floor.
    const size_t n_samples = static_cast<size_t>(std::llround(dur * audio::kSampleRate));
    std::vector<double> env(n_samples, 0.05);
    for (double tb : tk.beats) {
        const long lo = std::max(0L, std::lround((tb - 0.02) * audio::kSampleRate));
        const long hi = std::min(static_cast<long>(n_samples), std::lround((tb + 0.5) * audio::kSampleRate));
        for (long i = lo; i < hi; ++i) {
            const double d = static_cast<double>(i) / audio::kSampleRate - tb;
            const double pulse = d < 0.0 ? 1.0 + d / 0.02 : std::exp(-d / 0.12);
            env[static_cast<size_t>(i)] = std::min(0.95, env[static_cast<size_t>(i)] + 0.85 * pulse);
        }
    }
    tk.samples.resize(n_samples);
    for (size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / audio::kSampleRate;
        const double tone = 0.8 * std::sin(2.0 * M_PI * style.carrier_hz * t) +
                            0.2 * std::sin(2.0 * M_PI * 1.5 * style.carrier_hz * t);
        tk.samples[i] = std::clamp(env[i] * tone + 0.02 * rng.normal(), -1.0, 1.0);
    }

    // Transcript: one word per beat, the emotion name leading the take.
    for (size_t k = 0; k < tk.beats.size(); ++k) {
        audio::WordSpan span;
        span.word = k == 0 ? default_emotions()[static_cast<size_t>(emotion)] : kWords[k % 8];
        span.start_s = tk.beats[k];
        span.end_s = std::min(tk.beats[k] + 0.25, dur);
        tk.words.push_back(span);
    }

    // Poses: arm swing with extrema locked to the beat grid (the cosine is at
    // ±1 exactly when t hits phase + k·period), posture offsets per emotion,
    // and small per-joint angle jitter.
    const double A = style.swing_amp;
    tk.poses = Tensor(cfg.take_frames, cfg.n_joints * 6);
    for (int f = 0; f < cfg.take_frames; ++f) {
        const double t = f / cfg.fps;
        const double swing = std::cos(M_PI * (t - phase) / period);
        const double nod = std::cos(M_PI * (t - phase) / (2.0 * period));
        for (int j = 0; j < cfg.n_joints; ++j) {
            int axis = 2;
            double theta = 0.0;
            switch (j) {
                case 1: axis = 0; theta = style.spine_pitch; break;
                case 2: axis = 0; theta = 0.3 * style.head_pitch; break;
                case 3: axis = 0; theta = style.head_pitch + 0.15 * A * nod; break;
                case 4: axis = 2; theta = style.clavicle_lift; break;
                case 5: axis = 2; theta = -0.2 + A * swing; break;
                case 6: axis = 1; theta = 0.3 + 0.5 * A * swing; break;
                case 7: axis = 1; theta = 0.2 * A * swing; break;
                case 10: axis = 2; theta = -style.clavicle_lift; break;
                case 11: axis = 2; theta = 0.2 - A * swing; break;
                case 12: axis = 1; theta = -0.3 - 0.5 * A * swing; break;
                case 13: axis = 1; theta = -0.2 * A * swing; break;
                default: break;
            }
            theta += rng.normal(0.0, kJitterSigma);
            const auto r = motion::matrix_to_rot6d(elem_rotation(axis, theta));
            for (int i = 0; i < 6; ++i) tk.poses(f, j * 6 + i) = r[static_cast<size_t>(i)];
        }
    }
    return tk;
}

// Stratified split by take: within each emotion the takes are shuffled and cut
// at the configured fractions, so no take straddles two splits and every
// emotion reaches every split once it has enough takes.
std::vector<std::string> assign_splits(const std::vector<int>& take_emotion,
                                       const std::array<double, 3>& fractions, uint64_t seed) {
    std::vector<std::string> out(take_emotion.size());
    for (int e = 0; e < 4; ++e) {
        std::vector<int> group;
        for (size_t i = 0; i < take_emotion.size(); ++i)
            if (take_emotion[i] == e) group.push_back(static_cast<int>(i));
        if (group.empty()) continue;
        Rng grng(Rng::derive(seed, 0x5917ULL + static_cast<uint64_t>(e)));
        grng.shuffle(group);
        const int n = static_cast<int>(group.size());
        int n_train = std::max(1, static_cast<int>(std::lround(fractions[0] * n)));
        n_train = std::min(n_train, n);
        int n_val = std::min(static_cast<int>(std::lround(fractions[1] * n)), n - n_train);
        for (int i = 0; i < n; ++i) {
            const char* tag = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
            out[static_cast<size_t>(group[static_cast<size_t>(i)])] = tag;
        }
    }
    return out;
}

std::string take_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "take%03d", index);
    return buf;
}

}  // namespace

CorpusManifest generate_synthetic_corpus(const std::string& root, const SynthConfig& cfg,
                                         uint64_t seed) {
    if (cfg.n_takes < 1 || cfg.take_frames < cfg.clip_frames)
        throw ValidationError("synthetic corpus: need at least one take of at least one clip");
    if (cfg.clip_frames < 1 || cfg.stride < 1 || cfg.n_joints < 1 || cfg.fps <= 0.0)
        throw ValidationError("synthetic corpus: non-positive shape parameter");

    fs::create_directories(fs::path(root) / "poses");
    fs::create_directories(fs::path(root) / "audio");
    fs::create_directories(fs::path(root) / "transcripts");

    CorpusManifest m;
    m.root = root;
    m.fps = cfg.fps;
    m.n_frames = cfg.clip_frames;
    m.n_joints = cfg.n_joints;
    m.emotions = default_emotions();

    const std::vector<int> take_emotion = assign_emotions(cfg.n_takes, cfg.skewed_labels);
    const std::vector<std::string> take_split = assign_splits(take_emotion, m.split_fractions, seed);
    const auto windows = slice_clips(cfg.take_frames, cfg.clip_frames, cfg.stride);
    const long samples_per_frame_num = audio::kSampleRate;  // samples = frames·rate/fps

    for (int ti = 0; ti < cfg.n_takes; ++ti) {
        Rng rng(Rng::derive(seed, static_cast<uint64_t>(ti)));
        const TakeTracks tk = synth_take(cfg, take_emotion[static_cast<size_t>(ti)], rng);
        for (size_t w = 0; w < windows.size(); ++w) {
            const auto [start, end] = windows[w];
            const std::string id = take_name(ti) + "_c" + std::to_string(w);
            const double t0 = start / cfg.fps, t1 = end / cfg.fps;

            motion::PoseSequence pose;
            pose.fps = cfg.fps;
            pose.frames = Tensor(cfg.clip_frames, cfg.n_joints * 6);
            for (int f = 0; f < cfg.clip_frames; ++f)
                for (int c = 0; c < pose.frames.cols; ++c) pose.frames(f, c) = tk.poses(start + f, c);
            motion::save_pose_clip((fs::path(root) / "poses" / id).string(), pose);

            audio::AudioClip clip;
            const long s0 = std::llround(static_cast<double>(start) * samples_per_frame_num / cfg.fps);
            const long s1 = std::llround(static_cast<double>(end) * samples_per_frame_num / cfg.fps);
            clip.samples.assign(tk.samples.begin() + s0, tk.samples.begin() + s1);
            audio::save_wav((fs::path(root) / "audio" / (id + ".wav")).string(), clip);

            std::vector<audio::WordSpan> words;
            for (const audio::WordSpan& span : tk.words) {
                audio::WordSpan local;
                local.word = span.word;
                local.start_s = std::max(span.start_s, t0) - t0;
                local.end_s = std::min(span.end_s, t1) - t0;
                if (local.end_s - local.start_s > 0.02) words.push_back(local);
            }
            audio::save_transcript_words((fs::path(root) / "transcripts" / (id + ".json")).string(),
                                         words);

            ClipRecord rec;
            rec.id = id;
            rec.pose_stem = "poses/" + id;
            rec.audio_path = "audio/" + id + ".wav";
            rec.transcript_path = "transcripts/" + id + ".json";
            rec.emotion = take_emotion[static_cast<size_t>(ti)];
            rec.split = take_split[static_cast<size_t>(ti)];
            m.clips.push_back(rec);
        }
    }
    m.validate();
    save_manifest((fs::path(root) / "manifest.json").string(), m);
    return m;
}

void save_manifest(const std::string& path, const CorpusManifest& m) {
    m.validate();
    nlohmann::json j;
    j["fps"] = m.fps;
    j["n_frames"] = m.n_frames;
    j["n_joints"] = m.n_joints;
    j["emotions"] = m.emotions;
    j["split_fractions"] = m.split_fractions;
    j["clips"] = nlohmann::json::array();
    for (const ClipRecord& rec : m.clips)
        j["clips"].push_back({{"id", rec.id},
                              {"pose", rec.pose_stem},
                              {"audio", rec.audio_path},
                              {"transcript", rec.transcript_path},
                              {"emotion", m.emotions[static_cast<size_t>(rec.emotion)]},
                              {"split", rec.split}});
    std::ofstream out(path);
    if (!out) throw IoError("save_manifest: cannot open " + path);
    out << j.dump(2) << "\n";
}

CorpusManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_manifest: cannot open " + path);
    nlohmann::json j;
    CorpusManifest m;
    try {
        in >> j;
        m.fps = j.at("fps").get<double>();
        m.n_frames = j.at("n_frames").get<int>();
        m.n_joints = j.at("n_joints").get<int>();
        m.emotions = j.at("emotions").get<std::vector<std::string>>();
        m.split_fractions = j.at("split_fractions").get<std::array<double, 3>>();
        for (const nlohmann::json& c : j.at("clips")) {
            ClipRecord rec;
            rec.id = c.at("id").get<std::string>();
            rec.pose_stem = c.at("pose").get<std::string>();
            rec.audio_path = c.at("audio").get<std::string>();
            rec.transcript_path = c.at("transcript").get<std::string>();
            const std::string label = c.at("emotion").get<std::string>();
            const auto it = std::find(m.emotions.begin(), m.emotions.end(), label);
            if (it == m.emotions.end())
                throw IoError("load_manifest: clip " + rec.id + " has unknown emotion " + label);
            rec.emotion = static_cast<int>(it - m.emotions.begin());
            rec.split = c.at("split").get<std::string>();
            m.clips.push_back(rec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_manifest: bad manifest " + path + ": " + e.what());
    }
    m.root = fs::path(path).parent_path().string();
    m.validate();
    return m;
}

LoadedClip load_clip(const CorpusManifest& m, const ClipRecord& rec) {
    LoadedClip out;
    const fs::path root(m.root);
    out.pose = motion::load_pose_clip((root / rec.pose_stem).string());
    if (out.pose.n_frames() != m.n_frames)
        throw IoError("clip " + rec.id + ": pose file has " + std::to_string(out.pose.n_frames()) +
                      " frames, manifest expects " + std::to_string(m.n_frames));
    if (out.pose.joint_count() != m.n_joints)
        throw IoError("clip " + rec.id + ": pose file has " + std::to_string(out.pose.joint_count()) +
                      " joints, manifest expects " + std::to_string(m.n_joints));
    if (std::fabs(out.pose.fps - m.fps) > 1e-9)
        throw IoError("clip " + rec.id + ": pose fps " + std::to_string(out.pose.fps) +
                      " differs from manifest fps " + std::to_string(m.fps));

    out.audio = audio::load_wav((root / rec.audio_path).string());
    if (out.audio.sample_rate != audio::kSampleRate)
        throw IoError("clip " + rec.id + ": sample rate " + std::to_string(out.audio.sample_rate) +
                      ", expected " + std::to_string(audio::kSampleRate));
    const long want = std::llround(m.n_frames / m.fps * audio::kSampleRate);
    if (static_cast<long>(out.audio.samples.size()) != want)
        throw IoError("clip " + rec.id + ": " + std::to_string(out.audio.samples.size()) +
                      " audio samples, manifest expects " + std::to_string(want));

    out.words = audio::load_transcript_words((root / rec.transcript_path).string());
    const double dur = m.n_frames / m.fps;
    for (const audio::WordSpan& w : out.words)
        if (w.start_s < -1e-9 || w.end_s > dur + 1e-9 || w.end_s <= w.start_s)
            throw IoError("clip " + rec.id + ": word '" + w.word + "' spans [" +
                          std::to_string(w.start_s) + ", " + std::to_string(w.end_s) +
                          ") outside the clip duration " + std::to_string(dur));

    if (rec.emotion < 0 || rec.emotion >= static_cast<int>(m.emotions.size()))
        throw IoError("clip " + rec.id + ": emotion index " + std::to_string(rec.emotion) +
                      " outside the label set");
    out.emotion = rec.emotion;
    return out;
}

}  // namespace cogest::dataset
