#include <algorithm>
#include <cmath>
#include <fstream>

#include "cogest/audio.hpp"
#include "cogest/errors.hpp"
#include "json.hpp"

namespace cogest::audio {

std::vector<WordSpan> load_transcript_words(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_transcript_words: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_transcript_words: bad JSON in " + path + ": " + e.what());
    }
    if (!j.is_array()) throw IoError("load_transcript_words: expected a JSON list in " + path);
    std::vector<WordSpan> out;
    out.reserve(j.size());
    for (const auto& item : j) {
        WordSpan w;
        try {
            w.word = item.at("word").get<std::string>();
            w.start_s = item.at("start_s").get<double>();
            w.end_s = item.at("end_s").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw IoError("load_transcript_words: malformed entry in " + path + ": " + e.what());
        }
        out.push_back(std::move(w));
    }
    return out;
}

void save_transcript_words(const std::string& path, const std::vector<WordSpan>& words) {
    nlohmann::json j = nlohmann::json::array();
    for (const WordSpan& w : words) j.push_back({{"word", w.word}, {"start_s", w.start_s}, {"end_s", w.end_s}});
    std::ofstream f(path);
    if (!f) throw IoError("save_transcript_words: cannot open " + path);
    f << j.dump(2) << "\n";
}

Vocabulary::Vocabulary() {
    words_.push_back("<pad>");
    index_["<pad>"] = pad_id;
}

int Vocabulary::add(const std::string& word) {
    auto it = index_.find(word);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(words_.size());
    words_.push_back(word);
    index_[word] = id;
    return id;
}

int Vocabulary::require(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) throw ValidationError("vocabulary: unknown word '" + word + "'");
    return it->second;
}

const std::string& Vocabulary::word(int id) const {
    if (id < 0 || id >= size()) throw ValidationError("vocabulary: id out of range");
    return words_[static_cast<size_t>(id)];
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
    Vocabulary v;
    if (words.empty() || words[0] != "<pad>") throw ValidationError("vocabulary: first word must be <pad>");
    for (size_t i = 1; i < words.size(); ++i) {
        const int id = v.add(words[i]);
        if (id != static_cast<int>(i)) throw ValidationError("vocabulary: duplicate word '" + words[i] + "'");
    }
    return v;
}

std::vector<int> Transcript::uttered_frames() const {
    std::vector<int> out;
    for (size_t f = 0; f < ids.size(); ++f) {
        if (ids[f] == Vocabulary::pad_id) continue;
        if (f == 0 || ids[f - 1] != ids[f]) out.push_back(static_cast<int>(f));
    }
    return out;
}

Transcript align_transcript(std::vector<WordSpan> words, int n_frames, double fps, Vocabulary& vocab,
                            bool grow_vocab) {
    if (n_frames <= 0 || fps <= 0.0) throw ValidationError("align_transcript: n_frames and fps must be positive");
    const double horizon = n_frames / fps;
    for (const WordSpan& w : words) {
        if (!(w.start_s < w.end_s)) throw ValidationError("align_transcript: empty interval for '" + w.word + "'");
        if (w.start_s < 0.0 || w.end_s > horizon + 1e-9)
            throw ValidationError("align_transcript: interval for '" + w.word + "' outside the clip");
    }
    std::sort(words.begin(), words.end(), [](const WordSpan& a, const WordSpan& b) { return a.start_s < b.start_s; });
    for (size_t i = 1; i < words.size(); ++i)
        if (words[i].start_s < words[i - 1].end_s - 1e-9)
            throw ValidationError("align_transcript: intervals '" + words[i - 1].word + "' and '" + words[i].word +
                                  "' overlap");

    Transcript t;
    t.ids.assign(static_cast<size_t>(n_frames), Vocabulary::pad_id);
    size_t wi = 0;
    for (int f = 0; f < n_frames; ++f) {
        const double time = f / fps;
        while (wi < words.size() && words[wi].end_s <= time) ++wi;
        if (wi < words.size() && words[wi].start_s <= time && time < words[wi].end_s) {
            const int id = grow_vocab ? vocab.add(words[wi].word) : vocab.require(words[wi].word);
            t.ids[static_cast<size_t>(f)] = id;
        }
    }
    return t;
}

Tensor embed_transcript(const Transcript& t, const Tensor& table) {
    Tensor out(static_cast<int>(t.ids.size()), table.cols);
    for (size_t f = 0; f < t.ids.size(); ++f) {
        const int id = t.ids[f];
        if (id < 0 || id >= table.rows) throw ValidationError("embed_transcript: token id outside the table");
        for (int j = 0; j < table.cols; ++j) out(static_cast<int>(f), j) = table(id, j);
    }
    return out;
}

}  // namespace cogest::audio
