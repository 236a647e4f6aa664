#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cogest/audio.hpp"
#include "cogest/motion.hpp"

// Corpus pipeline: clip windowing, take-level stratified splits, the JSON
// manifest, and a synthetic emotion-coded corpus whose audio pulses, spoken
// words, and arm-swing extrema all share one per-take beat grid.

namespace cogest::dataset {

// Label set used by the synthetic corpus: neutral, happy, angry, sad.
const std::vector<std::string>& default_emotions();

struct ClipRecord {
    std::string id;               // "<take>_c<k>"
    std::string pose_stem;        // relative stem of the .f32/.json pose pair
    std::string audio_path;       // relative 16-bit mono WAV path
    std::string transcript_path;  // relative JSON word list
    int emotion = 0;              // index into CorpusManifest::emotions
    std::string split;            // "train" | "val" | "test"
};

struct CorpusManifest {
    std::string root;  // directory all record paths are relative to (not serialized)
    std::vector<ClipRecord> clips;
    double fps = 15.0;
    int n_frames = 60;
    int n_joints = 16;
    std::vector<std::string> emotions;
    std::array<double, 3> split_fractions = {0.7, 0.1, 0.2};  // train/val/test

    // Throws ValidationError on an empty or duplicated label set, fractions
    // that do not sum to one, out-of-range emotion indices, or unknown split
    // tags.
    void validate() const;
    std::vector<int> split_indices(const std::string& split) const;
};

// Window starts step by `stride`: [k·stride, k·stride+clip_len) for every k
// with the window fully inside the take.  Empty when the take is shorter than
// one clip.
std::vector<std::pair<int, int>> slice_clips(int take_length, int clip_len = 60, int stride = 30);

struct SynthConfig {
    int n_takes = 12;
    int take_frames = 150;  // frames per take before windowing
    int clip_frames = 60;
    int stride = 30;
    int n_joints = 16;
    double fps = 15.0;
    // false: emotions cycle evenly over takes; true: neutral-heavy mix in the
    // proportions 51:7:7:7.
    bool skewed_labels = false;
};

// Writes root/{poses,audio,transcripts}/<take>_c<k>.* plus root/manifest.json
// and returns the manifest.  Byte-identical for equal (config, seed).
CorpusManifest generate_synthetic_corpus(const std::string& root, const SynthConfig& cfg,
                                         uint64_t seed);

void save_manifest(const std::string& path, const CorpusManifest& m);
// Sets manifest.root to the directory containing `path`.
CorpusManifest load_manifest(const std::string& path);

struct LoadedClip {
    motion::PoseSequence pose;
    audio::AudioClip audio;
    std::vector<audio::WordSpan> words;
    int emotion = 0;
};

// Loads one record and cross-checks every shape against the manifest; any
// disagreement raises IoError naming both values.
LoadedClip load_clip(const CorpusManifest& m, const ClipRecord& rec);

}  // namespace cogest::dataset
