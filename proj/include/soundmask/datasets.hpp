#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "soundmask/audio.hpp"
#include "soundmask/error.hpp"
#include "soundmask/rng.hpp"

namespace soundmask::datasets {

enum class TaskType { multiclass, multilabel };

// A scenario names its prediction tasks and the class inventory per task.
// Multiclass scenarios have one task; multilabel scenarios have several
// binary tasks (independent sigmoid heads downstream).
struct ScenarioSpec {
    std::string name;
    TaskType task_type = TaskType::multiclass;
    std::vector<std::string> tasks;
    std::map<std::string, std::vector<std::string>> classes;
    double train_ratio = 0.70;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    double duration_seconds = 2.0;
    int sample_rate = 16000;
    std::uint64_t seed = 0;
};

inline void validate(const ScenarioSpec& spec) {
    if (spec.name.empty()) throw ConfigError("scenario: name required");
    if (spec.tasks.empty()) throw ConfigError("scenario: no tasks");
    if (spec.task_type == TaskType::multiclass && spec.tasks.size() != 1) {
        throw ConfigError("scenario: multiclass takes exactly one task");
    }
    for (const auto& task : spec.tasks) {
        const auto it = spec.classes.find(task);
        if (it == spec.classes.end() || it->second.size() < 2) {
            throw ConfigError("scenario: task " + task +
                              " needs at least two classes");
        }
        if (spec.task_type == TaskType::multilabel && it->second.size() != 2) {
            throw ConfigError("scenario: multilabel task " + task +
                              " must be binary");
        }
    }
    if (!(spec.train_ratio > 0.0) || !(spec.val_ratio > 0.0) ||
        !(spec.test_ratio > 0.0) ||
        std::abs(spec.train_ratio + spec.val_ratio + spec.test_ratio - 1.0) >
            1e-9) {
        throw ConfigError("scenario: split ratios must be positive and sum to 1");
    }
    if (!(spec.duration_seconds > 0.0) || spec.sample_rate <= 0) {
        throw ConfigError("scenario: bad clip geometry");
    }
}

struct LabeledClip {
    audio::AudioClip clip;
    std::map<std::string, std::string> labels;  // task -> value
    std::string source_id;    // grouping key; one source never straddles splits
    std::string source_path;  // original file, empty for synthetic clips
};

inline int class_index(const ScenarioSpec& spec, const std::string& task,
                       const std::string& value) {
    const auto it = spec.classes.find(task);
    if (it == spec.classes.end()) {
        throw LabelParseError("unknown task " + task);
    }
    const auto& inv = it->second;
    const auto pos = std::find(inv.begin(), inv.end(), value);
    if (pos == inv.end()) {
        throw LabelParseError("unknown label " + value + " for task " + task);
    }
    return static_cast<int>(pos - inv.begin());
}

// joint label value in task order, used for stratification and capping
inline std::string label_key(const ScenarioSpec& spec,
                             const LabeledClip& clip) {
    std::string key;
    for (const auto& task : spec.tasks) {
        const auto it = clip.labels.find(task);
        if (it == clip.labels.end()) {
            throw LabelParseError("clip missing label for task " + task);
        }
        key += task + '=' + it->second + ';';
    }
    return key;
}

// ---------------------------------------------------------------------------
// Scenario presets.

inline ScenarioSpec mgi_spec() {
    ScenarioSpec s;
    s.name = "MGI";
    s.tasks = {"genre"};
    s.classes["genre"] = {"Electronic",   "Experimental", "Folk",
                          "Hip-Hop",      "Instrumental", "International",
                          "Pop",          "Rock"};
    return s;
}

inline ScenarioSpec udi_spec() {
    ScenarioSpec s;
    s.name = "UDI";
    s.task_type = TaskType::multilabel;
    s.tasks = {"age", "gender", "accent"};
    s.classes["age"] = {"under-thirty", "thirty-plus"};
    s.classes["gender"] = {"female", "male"};
    s.classes["accent"] = {"us", "other"};
    return s;
}

inline ScenarioSpec sei_spec() {
    ScenarioSpec s;
    s.name = "SEI";
    s.tasks = {"emotion"};
    s.classes["emotion"] = {"calm",    "happy",   "sad",    "angry",
                            "fearful", "disgust", "surprise"};
    return s;
}

inline ScenarioSpec spf_spec() {
    ScenarioSpec s;
    s.name = "SPF";
    s.tasks = {"word"};
    s.classes["word"] = {"yes", "no",  "up",  "down", "left",
                         "right", "on", "off", "stop", "go"};
    return s;
}

inline ScenarioSpec synth_spec(int classes, std::uint64_t seed = 0) {
    ScenarioSpec s;
    s.name = "SYNTH";
    s.tasks = {"class"};
    for (int k = 0; k < classes; ++k) {
        s.classes["class"].push_back("c" + std::to_string(k));
    }
    s.seed = seed;
    return s;
}

inline ScenarioSpec synth_multilabel_spec(std::uint64_t seed = 0) {
    ScenarioSpec s;
    s.name = "SYNTH-ML";
    s.task_type = TaskType::multilabel;
    s.tasks = {"low", "mid", "high"};
    for (const auto& t : s.tasks) s.classes[t] = {"off", "on"};
    s.seed = seed;
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic corpora: hermetic stand-ins with classes separable by
// construction.

struct SynthSpec {
    int classes = 4;
    int per_class = 50;
    double duration_seconds = 2.0;
    int sample_rate = 16000;
    std::uint64_t seed = 0;
};

namespace detail {

// Classes are spectral comb patterns over a dominant shared noise floor:
// six tones ~12 dB per band above the floor, in a class-specific log-spaced
// band group within 800-7000 Hz. The floor keeps per-band contrasts modest,
// so broadband masking near 0 dB SNR drowns the class signature while light
// masking (tone boost still above the mask) leaves it intact.
struct BandGroup {
    double lo, hi;
};

inline BandGroup synth_group(int k, int groups) {
    const double step = std::pow(7000.0 / 800.0, 1.0 / groups);
    const double lo = 800.0 * std::pow(step, k);
    return {lo, lo * std::pow(step, 0.9)};
}

struct Comb {
    std::array<double, 6> freq, amp, phase;
    double am_freq, am_phase;
};

inline Comb make_comb(const BandGroup& g, Rng& rng) {
    Comb c;
    for (int j = 0; j < 6; ++j) {
        const double f = g.lo * std::pow(g.hi / g.lo, (j + 0.5) / 6.0) *
                         (1.0 + 0.03 * (2.0 * rng.uniform() - 1.0));
        c.freq[j] = f;
        // equal boost over the floor across mel bands of growing width
        c.amp[j] = 0.3 * std::sqrt((700.0 + f) / 1700.0);
        c.phase[j] = rng.uniform(0.0, 2.0 * M_PI);
    }
    c.am_freq = rng.uniform(1.0, 5.0);
    c.am_phase = rng.uniform(0.0, 2.0 * M_PI);
    return c;
}

inline double comb_value(const Comb& c, double t) {
    double v = 0.0;
    for (int j = 0; j < 6; ++j) {
        v += c.amp[j] * std::sin(2.0 * M_PI * c.freq[j] * t + c.phase[j]);
    }
    return v * (1.0 + 0.15 * std::sin(2.0 * M_PI * c.am_freq * t + c.am_phase));
}

constexpr double kSynthFloor = 0.8;
constexpr double kSynthScale = 0.55;

}  // namespace detail

inline std::vector<LabeledClip> synth_corpus(const SynthSpec& spec) {
    if (spec.classes < 2 || spec.classes > 12) {
        throw ConfigError("synth: classes must be in [2, 12]");
    }
    if (spec.per_class < 1) throw ConfigError("synth: per_class must be >= 1");
    if (!(spec.duration_seconds > 0.0)) {
        throw ConfigError("synth: bad clip geometry");
    }
    if (spec.sample_rate < 15000) {
        throw ConfigError("synth: sample rate too low for the band plan");
    }
    const std::size_t n = static_cast<std::size_t>(
        std::llround(spec.duration_seconds * spec.sample_rate));
    std::vector<LabeledClip> out;
    out.reserve(static_cast<std::size_t>(spec.classes) * spec.per_class);
    Rng rng(derive_seed(spec.seed, 0x5359));
    const double amp =
        detail::kSynthScale * audio::kFullScale * std::pow(10.0, -15.0 / 20.0);
    for (int k = 0; k < spec.classes; ++k) {
        const detail::BandGroup group = detail::synth_group(k, spec.classes);
        for (int i = 0; i < spec.per_class; ++i) {
            const detail::Comb comb = detail::make_comb(group, rng);
            LabeledClip lc;
            lc.labels["class"] = "c" + std::to_string(k);
            lc.source_id =
                "synth-c" + std::to_string(k) + "-" + std::to_string(i);
            lc.clip.sample_rate = spec.sample_rate;
            lc.clip.channels = 1;
            lc.clip.samples.resize(n);
            for (std::size_t s = 0; s < n; ++s) {
                const double t = static_cast<double>(s) / spec.sample_rate;
                const double v =
                    detail::kSynthFloor * (2.0 * rng.uniform() - 1.0) +
                    detail::comb_value(comb, t);
                lc.clip.samples[s] = audio::clamp16(amp * v);
            }
            out.push_back(std::move(lc));
        }
    }
    return out;
}

// Three independent binary band tasks: each "on" task contributes a comb in
// its band group over the shared floor. All eight combinations appear
// per_combo times.
inline std::vector<LabeledClip> synth_multilabel_corpus(
    int per_combo, double duration_seconds = 2.0, int sample_rate = 16000,
    std::uint64_t seed = 0) {
    if (per_combo < 1) throw ConfigError("synth: per_combo must be >= 1");
    if (!(duration_seconds > 0.0) || sample_rate < 15000) {
        throw ConfigError("synth: bad clip geometry");
    }
    const std::array<const char*, 3> task_names{"low", "mid", "high"};
    const std::size_t n = static_cast<std::size_t>(
        std::llround(duration_seconds * sample_rate));
    std::vector<LabeledClip> out;
    Rng rng(derive_seed(seed, 0x4d4c));
    const double amp =
        detail::kSynthScale * audio::kFullScale * std::pow(10.0, -15.0 / 20.0);
    for (int combo = 0; combo < 8; ++combo) {
        for (int i = 0; i < per_combo; ++i) {
            LabeledClip lc;
            lc.source_id = "synthml-" + std::to_string(combo) + "-" +
                           std::to_string(i);
            lc.clip.sample_rate = sample_rate;
            lc.clip.channels = 1;
            lc.clip.samples.resize(n);
            std::vector<detail::Comb> combs;
            for (int b = 0; b < 3; ++b) {
                lc.labels[task_names[b]] = (combo >> b & 1) ? "on" : "off";
                if (combo >> b & 1) {
                    combs.push_back(
                        detail::make_comb(detail::synth_group(b, 3), rng));
                }
            }
            for (std::size_t s = 0; s < n; ++s) {
                const double t = static_cast<double>(s) / sample_rate;
                double v = detail::kSynthFloor * (2.0 * rng.uniform() - 1.0);
                for (const auto& c : combs) v += detail::comb_value(c, t);
                lc.clip.samples[s] = audio::clamp16(amp * v);
            }
            out.push_back(std::move(lc));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting: stratified by joint label, grouped by source_id, largest
// remainder against the global split targets.

struct SplitResult {
    std::vector<LabeledClip> train, val, test;
};

namespace detail {

inline std::array<std::size_t, 3> largest_remainder(std::size_t total,
                                                    const double* ratios) {
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int j = 0; j < 3; ++j) {
        const double want = total * ratios[j];
        counts[j] = static_cast<std::size_t>(want);
        frac[j] = want - static_cast<double>(counts[j]);
        assigned += counts[j];
    }
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return a < b;
    });
    for (std::size_t left = total - assigned, i = 0; left > 0; --left, ++i) {
        ++counts[order[i % 3]];
    }
    return counts;
}

}  // namespace detail

inline SplitResult split(const std::vector<LabeledClip>& clips,
                         const ScenarioSpec& spec) {
    validate(spec);
    if (clips.empty()) throw TooFewClipsError("split: empty corpus");
    const double ratios[3] = {spec.train_ratio, spec.val_ratio,
                              spec.test_ratio};

    // strata in sorted label order; groups keep source_id clips together
    std::map<std::string, std::map<std::string, std::vector<std::size_t>>>
        strata;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        strata[label_key(spec, clips[i])][clips[i].source_id].push_back(i);
    }

    const auto global = detail::largest_remainder(clips.size(), ratios);
    std::array<std::size_t, 3> global_assigned{};
    SplitResult result;
    std::vector<std::vector<LabeledClip>*> sinks{&result.train, &result.val,
                                                 &result.test};

    std::size_t stratum_index = 0;
    for (const auto& [key, groups] : strata) {
        std::size_t stratum_clips = 0;
        std::vector<const std::vector<std::size_t>*> group_list;
        for (const auto& [sid, members] : groups) {
            group_list.push_back(&members);
            stratum_clips += members.size();
        }
        Rng rng(derive_seed(spec.seed, 0x5350 + stratum_index));
        rng.shuffle(group_list);

        // stratum targets: floors plus leftovers steered toward splits that
        // still trail their global largest-remainder target
        std::array<double, 3> want{};
        std::array<std::size_t, 3> target{};
        std::size_t floored = 0;
        for (int j = 0; j < 3; ++j) {
            want[j] = stratum_clips * ratios[j];
            target[j] = static_cast<std::size_t>(want[j]);
            floored += target[j];
        }
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double ra = want[a] - std::floor(want[a]);
            const double rb = want[b] - std::floor(want[b]);
            if (ra != rb) return ra > rb;
            const double da = static_cast<double>(global[a]) -
                              static_cast<double>(global_assigned[a] + target[a]);
            const double db = static_cast<double>(global[b]) -
                              static_cast<double>(global_assigned[b] + target[b]);
            if (da != db) return da > db;
            return a < b;
        });
        for (std::size_t left = stratum_clips - floored, i = 0; left > 0;
             --left, ++i) {
            ++target[order[i % 3]];
        }
        for (int j = 0; j < 3; ++j) global_assigned[j] += target[j];

        // place whole groups into the split with the largest deficit
        std::array<std::size_t, 3> placed{};
        for (const auto* members : group_list) {
            int best = 0;
            double best_deficit = -1e18;
            for (int j = 0; j < 3; ++j) {
                const double deficit = static_cast<double>(target[j]) -
                                       static_cast<double>(placed[j]);
                if (deficit > best_deficit) {
                    best_deficit = deficit;
                    best = j;
                }
            }
            placed[best] += members->size();
            for (std::size_t idx : *members) {
                sinks[best]->push_back(clips[idx]);
            }
        }
        for (int j = 0; j < 3; ++j) {
            if (placed[j] == 0) {
                throw TooFewClipsError("split: stratum " + key +
                                       " cannot reach every split");
            }
        }
        ++stratum_index;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Ingestion: corpus adapters over desk-scale mirrors of the published
// layouts, with audio transcoded to PCM WAV. Rows whose label cannot be
// mapped are skipped and counted; rows whose audio file is absent from the
// mirror are skipped and counted separately.

struct IngestResult {
    std::vector<LabeledClip> clips;
    std::size_t skipped_labels = 0;
    std::size_t skipped_missing = 0;
    std::size_t files_read = 0;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line,
                                             char sep) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == sep && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::size_t find_column(const std::vector<std::string>& header,
                               const std::string& name,
                               const std::string& file) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw LayoutError(file + ": missing column " + name);
    }
    return static_cast<std::size_t>(it - header.begin());
}

// normalize to the scenario's rate and cut into exact windows; short clips
// are zero-padded to one window
inline std::vector<audio::AudioClip> windows(const audio::AudioClip& in,
                                             const ScenarioSpec& spec) {
    audio::AudioClip clip = in.sample_rate == spec.sample_rate
                                ? in
                                : audio::resample(in, spec.sample_rate);
    const std::size_t win = static_cast<std::size_t>(
        std::llround(spec.duration_seconds * spec.sample_rate));
    std::vector<audio::AudioClip> out;
    if (clip.samples.size() < win) {
        clip.samples.resize(win, 0);
        out.push_back(std::move(clip));
        return out;
    }
    for (std::size_t start = 0; start + win <= clip.samples.size();
         start += win) {
        audio::AudioClip w;
        w.sample_rate = spec.sample_rate;
        w.channels = 1;
        w.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                         clip.samples.begin() +
                             static_cast<std::ptrdiff_t>(start + win));
        out.push_back(std::move(w));
    }
    return out;
}

struct RawEntry {
    std::string path;
    std::string source_id;
    std::map<std::string, std::string> labels;
};

// shared tail: load audio, window, shuffle, apply per-label cap
inline IngestResult assemble(const std::vector<RawEntry>& entries,
                             const ScenarioSpec& spec,
                             std::size_t cap_per_class,
                             std::size_t skipped_labels) {
    IngestResult result;
    result.skipped_labels = skipped_labels;
    std::vector<LabeledClip> candidates;
    for (const auto& e : entries) {
        if (!std::filesystem::exists(e.path)) {
            ++result.skipped_missing;
            continue;
        }
        const audio::AudioClip raw = audio::load_wav(e.path);
        ++result.files_read;
        for (auto& w : windows(raw, spec)) {
            LabeledClip lc;
            lc.clip = std::move(w);
            lc.labels = e.labels;
            lc.source_id = e.source_id;
            lc.source_path = e.path;
            candidates.push_back(std::move(lc));
        }
    }
    Rng rng(derive_seed(spec.seed, 0x494e47));
    rng.shuffle(candidates);
    std::map<std::string, std::size_t> taken;
    for (auto& c : candidates) {
        const std::string key = label_key(spec, c);
        if (cap_per_class == 0 || taken[key] < cap_per_class) {
            ++taken[key];
            result.clips.push_back(std::move(c));
        }
    }
    return result;
}

inline bool in_inventory(const ScenarioSpec& spec, const std::string& task,
                         const std::string& value) {
    const auto it = spec.classes.find(task);
    return it != spec.classes.end() &&
           std::find(it->second.begin(), it->second.end(), value) !=
               it->second.end();
}

// music corpus: tracks.csv (track_id, genre_top) + audio/NNN/NNNNNN.wav
inline IngestResult ingest_mgi(const std::filesystem::path& root,
                               const ScenarioSpec& spec,
                               std::size_t cap_per_class) {
    const auto meta = root / "tracks.csv";
    std::ifstream f(meta);
    if (!f) throw LayoutError(meta.string() + ": metadata table not found");
    std::string line;
    if (!std::getline(f, line)) {
        throw LayoutError(meta.string() + ": empty metadata table");
    }
    const auto header = split_fields(line, ',');
    const std::size_t id_col = find_column(header, "track_id", meta.string());
    const std::size_t genre_col =
        find_column(header, "genre_top", meta.string());

    std::vector<RawEntry> entries;
    std::size_t skipped = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_fields(line, ',');
        if (fields.size() <= std::max(id_col, genre_col)) {
            ++skipped;
            continue;
        }
        const std::string& genre = fields[genre_col];
        long id = -1;
        try {
            id = std::stol(fields[id_col]);
        } catch (...) {
        }
        if (id < 0 || !in_inventory(spec, "genre", genre)) {
            ++skipped;
            continue;
        }
        const auto pad = [](long v, std::size_t width) {
            std::string s = std::to_string(v);
            return s.size() < width ? std::string(width - s.size(), '0') + s
                                    : s;
        };
        RawEntry e;
        e.path = (root / "audio" / pad(id / 1000, 3) / (pad(id, 6) + ".wav"))
                     .string();
        e.source_id = "track" + std::to_string(id);
        e.labels["genre"] = genre;
        entries.push_back(std::move(e));
    }
    return assemble(entries, spec, cap_per_class, skipped);
}

// voice corpus: validated.tsv (client_id, path, age, gender, accent) +
// clips/<path>, desk-binarized demographics
inline IngestResult ingest_udi(const std::filesystem::path& root,
                               const ScenarioSpec& spec,
                               std::size_t cap_per_class) {
    const auto meta = root / "validated.tsv";
    std::ifstream f(meta);
    if (!f) throw LayoutError(meta.string() + ": metadata table not found");
    std::string line;
    if (!std::getline(f, line)) {
        throw LayoutError(meta.string() + ": empty metadata table");
    }
    const auto header = split_fields(line, '\t');
    const std::size_t client_col =
        find_column(header, "client_id", meta.string());
    const std::size_t path_col = find_column(header, "path", meta.string());
    const std::size_t age_col = find_column(header, "age", meta.string());
    const std::size_t gender_col =
        find_column(header, "gender", meta.string());
    const std::size_t accent_col =
        find_column(header, "accent", meta.string());

    const auto bucket_age = [](const std::string& v) -> std::string {
        if (v == "teens" || v == "twenties") return "under-thirty";
        if (v == "thirties" || v == "fourties" || v == "fifties" ||
            v == "sixties" || v == "seventies" || v == "eighties" ||
            v == "nineties") {
            return "thirty-plus";
        }
        return "";
    };

    std::vector<RawEntry> entries;
    std::size_t skipped = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_fields(line, '\t');
        const std::size_t need = std::max(
            {client_col, path_col, age_col, gender_col, accent_col});
        if (fields.size() <= need) {
            ++skipped;
            continue;
        }
        const std::string age = bucket_age(fields[age_col]);
        const std::string& gender = fields[gender_col];
        const std::string accent =
            fields[accent_col].empty()
                ? ""
                : (fields[accent_col] == "us" ? "us" : "other");
        if (age.empty() || accent.empty() ||
            (gender != "male" && gender != "female")) {
            ++skipped;
            continue;
        }
        std::filesystem::path rel(fields[path_col]);
        rel.replace_extension(".wav");
        RawEntry e;
        e.path = (root / "clips" / rel).string();
        e.source_id = fields[client_col];
        e.labels["age"] = age;
        e.labels["gender"] = gender;
        e.labels["accent"] = accent;
        entries.push_back(std::move(e));
    }
    return assemble(entries, spec, cap_per_class, skipped);
}

// emotional speech corpus: Actor_NN/MM-VV-EE-II-SS-RR-AA.wav with the third
// filename field carrying the emotion code
inline IngestResult ingest_sei(const std::filesystem::path& root,
                               const ScenarioSpec& spec,
                               std::size_t cap_per_class) {
    static const std::map<std::string, std::string> emotion_codes{
        {"02", "calm"},    {"03", "happy"},   {"04", "sad"}, {"05", "angry"},
        {"06", "fearful"}, {"07", "disgust"}, {"08", "surprise"}};

    std::vector<std::filesystem::path> actors;
    if (std::filesystem::is_directory(root)) {
        for (const auto& entry : std::filesystem::directory_iterator(root)) {
            if (entry.is_directory() &&
                entry.path().filename().string().rfind("Actor_", 0) == 0) {
                actors.push_back(entry.path());
            }
        }
    }
    if (actors.empty()) {
        throw LayoutError(root.string() + ": no Actor_* directories");
    }
    std::sort(actors.begin(), actors.end());

    std::vector<RawEntry> entries;
    std::size_t skipped = 0;
    for (const auto& actor : actors) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(actor)) {
            if (entry.is_regular_file() &&
                entry.path().extension() == ".wav") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const auto fields =
                split_fields(file.stem().string(), '-');
            if (fields.size() != 7 || fields[0] != "03") {
                ++skipped;  // not an audio-only record
                continue;
            }
            const auto it = emotion_codes.find(fields[2]);
            if (it == emotion_codes.end() ||
                !in_inventory(spec, "emotion", it->second)) {
                ++skipped;  // neutral or unknown code
                continue;
            }
            RawEntry e;
            e.path = file.string();
            e.source_id = "actor" + fields[6];
            e.labels["emotion"] = it->second;
            entries.push_back(std::move(e));
        }
    }
    return assemble(entries, spec, cap_per_class, skipped);
}

// command-word corpus: one folder per word, files named
// <speaker>_nohash_<take>.wav
inline IngestResult ingest_spf(const std::filesystem::path& root,
                               const ScenarioSpec& spec,
                               std::size_t cap_per_class) {
    std::vector<std::filesystem::path> dirs;
    if (std::filesystem::is_directory(root)) {
        for (const auto& entry : std::filesystem::directory_iterator(root)) {
            if (entry.is_directory()) dirs.push_back(entry.path());
        }
    }
    if (dirs.empty()) {
        throw LayoutError(root.string() + ": no word directories");
    }
    std::sort(dirs.begin(), dirs.end());

    std::vector<RawEntry> entries;
    std::size_t skipped = 0;
    for (const auto& dir : dirs) {
        const std::string word = dir.filename().string();
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_regular_file() &&
                entry.path().extension() == ".wav") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (!in_inventory(spec, "word", word)) {
            skipped += files.size();
            continue;
        }
        for (const auto& file : files) {
            const std::string stem = file.stem().string();
            const auto cut = stem.find('_');
            RawEntry e;
            e.path = file.string();
            e.source_id =
                (cut == std::string::npos ? stem : stem.substr(0, cut));
            e.labels["word"] = word;
            entries.push_back(std::move(e));
        }
    }
    return assemble(entries, spec, cap_per_class, skipped);
}

}  // namespace detail

inline IngestResult ingest(const std::string& root, const ScenarioSpec& spec,
                           std::size_t cap_per_class = 0) {
    validate(spec);
    if (!std::filesystem::is_directory(root)) {
        throw LayoutError(root + ": not a directory");
    }
    if (spec.name == "MGI") return detail::ingest_mgi(root, spec, cap_per_class);
    if (spec.name == "UDI") return detail::ingest_udi(root, spec, cap_per_class);
    if (spec.name == "SEI") return detail::ingest_sei(root, spec, cap_per_class);
    if (spec.name == "SPF") return detail::ingest_spf(root, spec, cap_per_class);
    throw ConfigError("no ingest adapter for scenario " + spec.name);
}

}  // namespace soundmask::datasets
