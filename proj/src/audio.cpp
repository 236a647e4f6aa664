#include "cogest/audio.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>

#include "cogest/errors.hpp"

namespace cogest::audio {

namespace {

// FFTW plan management is not reentrant; executions are, but we keep the whole
// transform under one lock since mel extraction is not on the hot path.
std::mutex g_fft_mutex;

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 | static_cast<uint32_t>(p[2]) << 16 |
           static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | p[1] << 8); }

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular filterbank, kMelBins filters over [0, kMelFmax].
// Returns kMelBins × (kFftSize/2 + 1) weights.
const Tensor& mel_filterbank() {
    static const Tensor bank = [] {
        const int n_bins = kFftSize / 2 + 1;
        Tensor fb(kMelBins, n_bins);
        const double m_hi = hz_to_mel(kMelFmax);
        std::vector<double> hz(kMelBins + 2);
        for (int i = 0; i < kMelBins + 2; ++i) hz[static_cast<size_t>(i)] = mel_to_hz(m_hi * i / (kMelBins + 1));
        for (int m = 0; m < kMelBins; ++m) {
            const double lo = hz[static_cast<size_t>(m)], mid = hz[static_cast<size_t>(m + 1)],
                         hi = hz[static_cast<size_t>(m + 2)];
            for (int k = 0; k < n_bins; ++k) {
                const double f = static_cast<double>(k) * kSampleRate / kFftSize;
                double w = 0.0;
                if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
                fb(m, k) = w;
            }
        }
        return fb;
    }();
    return bank;
}

}  // namespace

AudioClip load_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_wav: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw IoError("load_wav: " + path + " is not a RIFF/WAVE file");

    AudioClip clip;
    bool have_fmt = false, have_data = false;
    size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::string id(reinterpret_cast<const char*>(buf.data() + pos), 4);
        const uint32_t size = read_u32(buf.data() + pos + 4);
        pos += 8;
        if (pos + size > buf.size()) throw IoError("load_wav: truncated chunk in " + path);
        if (id == "fmt ") {
            if (size < 16) throw IoError("load_wav: malformed fmt chunk in " + path);
            const uint16_t format = read_u16(buf.data() + pos);
            const uint16_t channels = read_u16(buf.data() + pos + 2);
            clip.sample_rate = static_cast<int>(read_u32(buf.data() + pos + 4));
            const uint16_t bits = read_u16(buf.data() + pos + 14);
            if (format != 1 || bits != 16) throw IoError("load_wav: only 16-bit PCM is supported: " + path);
            if (channels != 1) throw IoError("load_wav: only mono is supported: " + path);
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw IoError("load_wav: data chunk before fmt in " + path);
            const size_t n = size / 2;
            clip.samples.resize(n);
            for (size_t i = 0; i < n; ++i) {
                const int16_t s = static_cast<int16_t>(buf[pos + 2 * i] | buf[pos + 2 * i + 1] << 8);
                clip.samples[i] = static_cast<double>(s) / 32768.0;
            }
            have_data = true;
        }
        pos += size + (size & 1);  // chunks are word-aligned
    }
    if (!have_fmt || !have_data) throw IoError("load_wav: missing fmt or data chunk in " + path);
    return clip;
}

void save_wav(const std::string& path, const AudioClip& clip) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_wav: cannot open " + path);
    const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
    auto put_u32 = [&f](uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        f.write(reinterpret_cast<const char*>(b), 4);
    };
    auto put_u16 = [&f](uint16_t v) {
        const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        f.write(reinterpret_cast<const char*>(b), 2);
    };
    f.write("RIFF", 4);
    put_u32(36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<uint32_t>(clip.sample_rate));
    put_u32(static_cast<uint32_t>(clip.sample_rate) * 2);
    put_u16(2);
    put_u16(16);
    f.write("data", 4);
    put_u32(data_bytes);
    for (double x : clip.samples) {
        const long q = std::lrint(std::clamp(x, -1.0, 1.0) * 32768.0);
        const auto s = static_cast<int16_t>(std::clamp(q, -32768l, 32767l));
        put_u16(static_cast<uint16_t>(s));
    }
    if (!f) throw IoError("save_wav: short write to " + path);
}

Tensor compute_mel(const AudioClip& clip) {
    if (clip.sample_rate != kSampleRate)
        throw ValidationError("compute_mel: clip must be resampled to 16 kHz first");
    if (clip.samples.size() < kFftSize) throw ShapeError("compute_mel: clip shorter than one FFT window");
    const int frames = mel_frame_count(clip.samples.size());
    const int n_bins = kFftSize / 2 + 1;

    Tensor power(n_bins, frames);
    {
        std::lock_guard<std::mutex> lock(g_fft_mutex);
        double* in = fftw_alloc_real(kFftSize);
        fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(n_bins));
        fftw_plan plan = fftw_plan_dft_r2c_1d(kFftSize, in, out, FFTW_ESTIMATE);
        std::vector<double> window(kFftSize);
        for (int n = 0; n < kFftSize; ++n) window[static_cast<size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / kFftSize);
        for (int t = 0; t < frames; ++t) {
            const size_t off = static_cast<size_t>(t) * kHop;
            for (int n = 0; n < kFftSize; ++n) in[n] = clip.samples[off + static_cast<size_t>(n)] * window[static_cast<size_t>(n)];
            fftw_execute(plan);
            for (int k = 0; k < n_bins; ++k) power(k, t) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
        }
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }

    const Tensor& fb = mel_filterbank();
    Tensor mel(kMelBins, frames);
    for (int m = 0; m < kMelBins; ++m)
        for (int t = 0; t < frames; ++t) {
            double acc = 0.0;
            for (int k = 0; k < n_bins; ++k) acc += fb(m, k) * power(k, t);
            mel(m, t) = std::log(acc + 1e-6);
        }
    return mel;
}

}  // namespace cogest::audio
