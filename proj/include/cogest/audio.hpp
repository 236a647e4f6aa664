#pragma once

#include <map>
#include <string>
#include <vector>

#include "cogest/tensor.hpp"

// Audio and transcript conditioning: WAV I/O, log-mel spectrograms, and the
// frame-aligned token track derived from word timings.

namespace cogest::audio {

constexpr int kSampleRate = 16000;
constexpr int kFftSize = 1024;
constexpr int kHop = 512;
constexpr int kMelBins = 128;
constexpr double kMelFmax = 8000.0;

struct AudioClip {
    std::vector<double> samples;  // mono, in [-1, 1]
    int sample_rate = kSampleRate;
};

// Frame count of the no-padding STFT for a given sample count.
inline int mel_frame_count(size_t n_samples) {
    return n_samples < kFftSize ? 0 : static_cast<int>((n_samples - kFftSize) / kHop) + 1;
}

// 16-bit PCM mono WAV.
AudioClip load_wav(const std::string& path);
void save_wav(const std::string& path, const AudioClip& clip);

// Log-mel energies, kMelBins × T, Hann window, power spectrum, log(x + 1e-6).
// Requires 16 kHz input and at least one full FFT window of samples.
Tensor compute_mel(const AudioClip& clip);

struct WordSpan {
    std::string word;
    double start_s = 0.0;
    double end_s = 0.0;
};

// Transcript files are a JSON list of {"word","start_s","end_s"}.
std::vector<WordSpan> load_transcript_words(const std::string& path);
void save_transcript_words(const std::string& path, const std::vector<WordSpan>& words);

// Token id 0 is reserved for pauses.
class Vocabulary {
  public:
    static constexpr int pad_id = 0;

    Vocabulary();
    int add(const std::string& word);            // idempotent
    int require(const std::string& word) const;  // throws on unknown words
    int size() const { return static_cast<int>(words_.size()); }
    const std::string& word(int id) const;
    const std::vector<std::string>& words() const { return words_; }
    static Vocabulary from_words(const std::vector<std::string>& words);

  private:
    std::vector<std::string> words_;
    std::map<std::string, int> index_;
};

struct Transcript {
    std::vector<int> ids;  // length N, pad_id at pauses

    // Onset frame of every maximal non-pad span; the Eq.-style beat loss uses
    // one anchor per span, so U = uttered_frames().size().
    std::vector<int> uttered_frames() const;
};

// Frame f carries the word whose [start_s, end_s) interval contains f/fps.
// Intervals must be non-overlapping and lie inside [0, n_frames/fps].
Transcript align_transcript(std::vector<WordSpan> words, int n_frames, double fps, Vocabulary& vocab,
                            bool grow_vocab);

// Row-wise table lookup, one row per frame.  Table is vocab_size × D.
Tensor embed_transcript(const Transcript& t, const Tensor& table);

}  // namespace cogest::audio
