// Acceptance gate: ten go/no-go checks covering the numerical core, the
// metric oracles, desk-scale behavioral trends, reproducibility, and the
// CLI end to end.  Prints one [PASS]/[FAIL] line per criterion; exit 0 iff
// all selected criteria pass.  Scratch artifacts land in --work and are
// kept when something fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cogest/audio.hpp"
#include "cogest/autodiff.hpp"
#include "cogest/dataset.hpp"
#include "cogest/ebm.hpp"
#include "cogest/errors.hpp"
#include "cogest/losses.hpp"
#include "cogest/metrics.hpp"
#include "cogest/motion.hpp"
#include "cogest/pipeline.hpp"
#include "cogest/rng.hpp"
#include "cogest/stp.hpp"
#include "cogest/training.hpp"
#include "cogest/vae.hpp"
#include "json.hpp"

using namespace cogest;
namespace fs = std::filesystem;
using ad::Tape;
using ad::Var;
using nlohmann::json;

namespace {

struct Args {
    std::string cli;                 // path to the command-line binary
    std::string work = "acceptance_scratch";
    int epochs = 12;                 // main-stage epochs for the behavioral runs
    int vae_epochs = 12;
    int takes = 100;                 // 4 clips per take -> 400 clips
    uint64_t seed = 77;
    std::vector<int> only;           // subset of criteria to run
    bool keep = false;
};

Args g_args;

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Sub-check bookkeeping inside one criterion.
struct Tally {
    int bad = 0;
    std::string first;
    void expect(bool ok, const std::string& detail) {
        if (!ok) {
            ++bad;
            if (first.empty()) first = detail;
        }
    }
    bool ok() const { return bad == 0; }
};

void note(const char* fmt, ...) {
    std::va_list ap;
    va_start(ap, fmt);
    std::printf("       ");
    std::vprintf(fmt, ap);
    std::printf("\n");
    std::fflush(stdout);
    va_end(ap);
}

Tensor random_tensor(int rows, int cols, Rng& rng, double scale = 1.0) {
    Tensor t(rows, cols);
    for (double& x : t.v) x = rng.uniform(-scale, scale);
    return t;
}

// Reverse-mode gradients vs 64-bit central differences; returns the worst
// relative error (absolute floor 1) over every component of every input.
double fd_worst_rel(const std::vector<Tensor>& inputs,
                    const std::function<Var(Tape&, std::vector<Var>&)>& build, double h = 1e-5) {
    auto eval = [&](const std::vector<Tensor>& vals) {
        Tape tape;
        std::vector<Var> leaves;
        for (const Tensor& t : vals) leaves.push_back(tape.input(t));
        return build(tape, leaves).val()(0, 0);
    };
    std::vector<ad::Parameter> params;
    for (size_t i = 0; i < inputs.size(); ++i) params.emplace_back("in" + std::to_string(i), inputs[i]);
    Tape tape;
    std::vector<Var> leaves;
    for (auto& p : params) leaves.push_back(tape.param(p));
    tape.backward(build(tape, leaves));

    double worst = 0.0;
    std::vector<Tensor> work = inputs;
    for (size_t pi = 0; pi < inputs.size(); ++pi)
        for (size_t j = 0; j < inputs[pi].v.size(); ++j) {
            const double orig = work[pi].v[j];
            work[pi].v[j] = orig + h;
            const double up = eval(work);
            work[pi].v[j] = orig - h;
            const double dn = eval(work);
            work[pi].v[j] = orig;
            const double numeric = (up - dn) / (2.0 * h);
            const double analytic = params[pi].grad.v[j];
            const double rel = std::fabs(numeric - analytic) /
                               std::max({1.0, std::fabs(numeric), std::fabs(analytic)});
            worst = std::max(worst, rel);
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Criterion 1: rotation round trips, prompt-reinforcement closed form,
// loss gradients against finite differences.
// ---------------------------------------------------------------------------

bool criterion_1() {
    Tally t;
    Rng rng(101);

    double worst_angle = 0.0;
    for (int k = 0; k < 1000; ++k) {
        motion::Rot6D r;
        motion::Mat3 m{};
        for (int tries = 0;; ++tries) {
            for (double& x : r) x = rng.uniform(-1.0, 1.0);
            try {
                m = motion::rot6d_to_matrix(r);
                break;
            } catch (const DegenerateInputError&) {
                if (tries > 50) throw;
            }
        }
        const motion::Mat3 m2 = motion::rot6d_to_matrix(motion::matrix_to_rot6d(m));
        worst_angle = std::max(worst_angle, motion::geodesic_angle(m, m2));
    }
    note("rotation round trip: worst angle %.3e rad over 1000 cases", worst_angle);
    t.expect(worst_angle < 1e-6, "rotation round trip above 1e-6 rad");

    double worst_closed = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int d = rng.uniform_int(3, 8);
        const int l = rng.uniform_int(1, 5);
        const int r = l + rng.uniform_int(0, 6);
        Tensor s = random_tensor(1, d, rng);
        Tensor te = random_tensor(l, 1, rng);
        Tensor f = random_tensor(r, d, rng);
        Tape tape;
        Var out = stp::temporal_reinforcement(tape, tape.input(s), tape.input(te), tape.input(f), l);

        double ss = 0.0;
        for (int c = 0; c < d; ++c) ss += s(0, c) * s(0, c);
        double mx = -1e300;
        for (int i = 0; i < l; ++i) mx = std::max(mx, ss * te(i, 0));
        std::vector<double> w(static_cast<size_t>(l));
        double z = 0.0;
        for (int i = 0; i < l; ++i) z += (w[static_cast<size_t>(i)] = std::exp(ss * te(i, 0) - mx));
        for (int i = 0; i < r; ++i) {
            const double gain = i < l ? 1.0 + w[static_cast<size_t>(i)] / z : 1.0;
            for (int c = 0; c < d; ++c)
                worst_closed = std::max(worst_closed, std::fabs(out.val()(i, c) - f(i, c) * gain));
        }
    }
    note("reinforcement vs softmax(|s|^2 te) closed form: worst |diff| %.3e", worst_closed);
    t.expect(worst_closed < 1e-6, "closed form mismatch above 1e-6");

    struct LossCase {
        const char* name;
        std::function<double(Rng&)> run;  // returns worst rel err of one instance
    };
    std::vector<LossCase> cases;
    cases.push_back({"reconstruction", [](Rng& r) {
        std::vector<Tensor> in = {random_tensor(5, 7, r), random_tensor(5, 7, r)};
        return fd_worst_rel(in, [](Tape& t2, std::vector<Var>& v) {
            return loss::reconstruction_loss(t2, v[0], v[1]);
        });
    }});
    cases.push_back({"motion smooth", [](Rng& r) {
        const double gamma = r.uniform(1.0, 10.0);
        std::vector<Tensor> in = {random_tensor(6, 5, r), random_tensor(6, 5, r)};
        return fd_worst_rel(in, [gamma](Tape& t2, std::vector<Var>& v) {
            return loss::motion_smooth_loss(t2, v[0], v[1], gamma);
        });
    }});
    cases.push_back({"beat contrastive", [](Rng& r) {
        const int n = r.uniform_int(5, 9);
        std::vector<int> uttered;
        for (int f = 0; f < n; ++f)
            if (r.uniform() < 0.4) uttered.push_back(f);
        if (uttered.empty()) uttered.push_back(r.uniform_int(0, n - 1));
        const double tau = r.uniform(0.1, 0.6);
        std::vector<Tensor> in = {random_tensor(n, 4, r), random_tensor(n, 4, r)};
        return fd_worst_rel(in, [uttered, tau](Tape& t2, std::vector<Var>& v) {
            return ebm::beat_contrastive_loss(t2, v[0], v[1], uttered, tau);
        });
    }});
    cases.push_back({"emotion cross-entropy", [](Rng& r) {
        const int label = r.uniform_int(0, 3);
        std::vector<Tensor> in = {random_tensor(1, 4, r, 2.0)};
        return fd_worst_rel(in, [label](Tape& t2, std::vector<Var>& v) {
            return ebm::emotion_ce_loss(t2, v[0], label);
        });
    }});
    cases.push_back({"discriminator", [](Rng& r) {
        std::vector<Tensor> in = {random_tensor(1, 1, r, 3.0), random_tensor(1, 1, r, 3.0)};
        return fd_worst_rel(in, [](Tape& t2, std::vector<Var>& v) {
            return loss::d_loss_from_logits(t2, v[0], v[1]);
        });
    }});
    cases.push_back({"generator adversarial", [](Rng& r) {
        const bool ns = r.uniform() < 0.5;
        std::vector<Tensor> in = {random_tensor(1, 1, r, 3.0)};
        return fd_worst_rel(in, [ns](Tape& t2, std::vector<Var>& v) {
            return loss::g_loss_from_logits(t2, v[0], ns);
        });
    }});
    cases.push_back({"total objective", [](Rng& r) {
        loss::LossWeights w;
        w.lambda_r = r.uniform(1.0, 100.0);
        w.lambda_b = r.uniform(0.01, 1.0);
        w.lambda_e = r.uniform(0.01, 1.0);
        w.lambda_s = r.uniform(0.01, 1.0);
        std::vector<Tensor> in;
        for (int i = 0; i < 5; ++i) in.push_back(random_tensor(1, 1, r));
        return fd_worst_rel(in, [w](Tape& t2, std::vector<Var>& v) {
            return loss::total_objective(t2, v[0], v[1], v[2], v[3], v[4], w);
        });
    }});
    cases.push_back({"emotion sampler elbo", [](Rng& r) {
        vae::CVAEConfig cfg;
        cfg.d_feature = 6;
        cfg.latent = 3;
        cfg.hidden = 8;
        auto ps = std::make_shared<nn::ParamStore>();
        Rng wrng(static_cast<uint64_t>(r.uniform_int(1, 1 << 20)));
        auto model = std::make_shared<vae::EmotionVAE>(*ps, "vae", cfg, wrng);
        const int label = r.uniform_int(0, 3);
        const Tensor eps = random_tensor(1, 3, r);
        std::vector<Tensor> in = {random_tensor(1, 6, r)};
        return fd_worst_rel(in, [ps, model, label, eps](Tape& t2, std::vector<Var>& v) {
            auto out = model->forward(t2, v[0], label, eps);
            return model->loss(t2, out, v[0]);
        });
    }});

    for (const auto& lc : cases) {
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) worst = std::max(worst, lc.run(rng));
        note("gradient vs central differences, %s: worst rel err %.3e (20 instances)", lc.name,
             worst);
        t.expect(worst < 1e-4, std::string(lc.name) + " gradient above 1e-4");
    }

    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

// ---------------------------------------------------------------------------
// Criterion 2: loss identities at special points.
// ---------------------------------------------------------------------------

bool criterion_2() {
    Tally t;
    Rng rng(202);

    {
        Tape tape;
        Var tr = tape.input(random_tensor(8, 4, rng));
        Var be = tape.input(random_tensor(8, 4, rng));
        Var l = ebm::beat_contrastive_loss(tape, tr, be, {}, 0.1);
        note("beat loss with no uttered frames: %.17g", l.val()(0, 0));
        t.expect(l.val()(0, 0) == 0.0, "beat loss not exactly 0 for U=0");
    }
    {
        // Time-constant offsets: both softmax tracks are uniform, KL vanishes
        // even when the two constants differ.
        Tape tape;
        Tensor real(7, 5), fake(7, 5);
        for (int c = 0; c < 5; ++c)
            for (int r = 0; r < 7; ++r) {
                real(r, c) = 0.3 * (c + 1);
                fake(r, c) = -1.1 * (c + 1);
            }
        Var l = loss::motion_smooth_loss(tape, tape.input(real), tape.input(fake), 10.0);
        note("smooth loss, time-constant offsets: %.3e", l.val()(0, 0));
        t.expect(std::fabs(l.val()(0, 0)) < 1e-12, "smooth loss not 0 for constant offsets");

        Tape tape2;
        Tensor same = random_tensor(7, 5, rng);
        Var l2 = loss::motion_smooth_loss(tape2, tape2.input(same), tape2.input(same), 1.0);
        note("smooth loss, gamma=1 equal tracks: %.3e", l2.val()(0, 0));
        t.expect(std::fabs(l2.val()(0, 0)) < 1e-12, "smooth loss not 0 for equal tracks");
    }
    {
        Tensor e = random_tensor(200, 8, rng);
        const double fd_self = metrics::frechet_distance(e, e);
        note("frechet distance of a set against itself: %.3e", fd_self);
        t.expect(std::fabs(fd_self) < 1e-6, "FGD(X,X) above 1e-6");

        std::vector<Tensor> clips;
        for (int i = 0; i < 10; ++i) clips.push_back(random_tensor(24, 12, rng));
        metrics::SequenceAutoencoder emb({12, 8, 6}, 33);
        emb.mark_trained();
        const double fgd_self = metrics::fgd(clips, clips, emb);
        note("embedded FGD of a clip set against itself: %.3e", fgd_self);
        t.expect(std::fabs(fgd_self) < 1e-6, "embedded FGD(X,X) above 1e-6");
    }
    {
        Tape tape;
        Var l = loss::d_loss_from_logits(tape, tape.input(Tensor(1, 1)), tape.input(Tensor(1, 1)));
        const double want = 2.0 * std::log(2.0);
        note("d loss at both-sides-0.5: %.17g (2 log 2 = %.17g)", l.val()(0, 0), want);
        t.expect(std::fabs(l.val()(0, 0) - want) < 1e-9, "d loss at (0.5,0.5) off 2 log 2");
    }

    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

// ---------------------------------------------------------------------------
// Criterion 3: metric implementations against independent oracles.
// ---------------------------------------------------------------------------

bool criterion_3() {
    Tally t;
    Rng rng(303);

    double worst_ba = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int na = rng.uniform_int(1, 12);
        const int ng = rng.uniform_int(1, 15);
        const double sigma = rng.uniform(0.05, 0.3);
        std::vector<double> a(static_cast<size_t>(na)), g(static_cast<size_t>(ng));
        for (double& x : a) x = rng.uniform(0.0, 4.0);
        for (double& x : g) x = rng.uniform(0.0, 4.0);
        double oracle = 0.0;
        for (double ab : a) {
            double best = 1e300;
            for (double gb : g) best = std::min(best, std::fabs(ab - gb));
            oracle += std::exp(-best * best / (2.0 * sigma * sigma));
        }
        oracle /= static_cast<double>(na);
        worst_ba = std::max(worst_ba, std::fabs(metrics::beat_score(a, g, sigma) - oracle));
    }
    note("beat score vs nearest-beat oracle: worst |diff| %.3e over 100 instances", worst_ba);
    t.expect(worst_ba < 1e-9, "beat score differs from oracle above 1e-9");

    {
        const int n = 100000;
        const double d = 1.7;
        Tensor a(n, 1), b(n, 1);
        for (int i = 0; i < n; ++i) {
            a(i, 0) = rng.normal();
            b(i, 0) = d + rng.normal();
        }
        const double fd = metrics::frechet_distance(a, b);
        note("frechet on shifted 1-D gaussians: %.5f vs d^2 = %.5f (rel err %.4f)", fd, d * d,
             std::fabs(fd - d * d) / (d * d));
        t.expect(std::fabs(fd - d * d) / (d * d) <= 0.05, "gaussian frechet off d^2 by > 5%");
    }
    {
        std::vector<Tensor> samples;
        for (int i = 0; i < 6; ++i) samples.push_back(random_tensor(8, 10, rng));
        double want = 0.0;
        int pairs = 0;
        for (size_t i = 0; i < samples.size(); ++i)
            for (size_t j = i + 1; j < samples.size(); ++j) {
                want += metrics::l2_distance(samples[i], samples[j]);
                ++pairs;
            }
        want /= pairs;
        const auto div = metrics::diversity(samples, 5);
        note("diversity %.17g vs pairwise loop %.17g", div.mean, want);
        t.expect(div.mean == want, "diversity mean differs from the pairwise loop");
    }

    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

// ---------------------------------------------------------------------------
// Shared desk-scale corpus, evaluation classifier, and training runs for the
// behavioral criteria.
// ---------------------------------------------------------------------------

struct TestClip {
    Tensor mel;
    Tensor initial;  // first M pose rows
    Tensor real;     // full pose matrix
    std::vector<double> onsets;
    int label = 0;
};

struct Eval {
    double ea = 0.0;      // emotion accuracy, percent
    double l2 = 0.0;      // mean held-out L2
    double rec = 0.0;     // mean held-out |real - fake|
    double ba_own = 0.0;  // mean BA against the clip's own audio
    double ba_shuf = 0.0; // mean BA against audio from a distant clip
    double jerk = 0.0;    // mean positional jerk of the generated motion
};

struct Shared {
    fs::path work;
    std::optional<dataset::CorpusManifest> corpus;
    audio::Vocabulary vocab;
    std::vector<TestClip> test;
    std::optional<metrics::GestureClassifier> classifier;
    std::unique_ptr<pipeline::GestureModel> model_a;  // full run, kept for reuse
    std::map<std::string, Eval> evals;
    bool vae_done = false;
};

Shared S;

void ensure_corpus() {
    if (S.corpus) return;
    const double t0 = now_s();
    dataset::SynthConfig sc;
    sc.n_takes = g_args.takes;
    auto corpus = dataset::generate_synthetic_corpus((S.work / "corpus").string(), sc, 20260822);
    S.vocab = training::build_vocabulary(corpus);
    const auto test_idx = corpus.split_indices("test");
    const int m_rows = pipeline::ModelConfig{}.m_initial;
    for (int idx : test_idx) {
        const auto& rec = corpus.clips[static_cast<size_t>(idx)];
        dataset::LoadedClip lc = dataset::load_clip(corpus, rec);
        TestClip tc;
        tc.mel = audio::compute_mel(lc.audio);
        tc.real = lc.pose.frames;
        tc.initial = Tensor(m_rows, tc.real.cols);
        for (int r = 0; r < m_rows; ++r)
            for (int c = 0; c < tc.real.cols; ++c) tc.initial(r, c) = tc.real(r, c);
        tc.onsets = metrics::audio_onsets(tc.mel);
        tc.label = rec.emotion;
        S.test.push_back(std::move(tc));
    }
    S.corpus = std::move(corpus);
    note("corpus: %zu clips (%zu held-out test), built in %.1f s",
         S.corpus->clips.size(), S.test.size(), now_s() - t0);
}

void ensure_classifier() {
    if (S.classifier) return;
    ensure_corpus();
    const double t0 = now_s();
    std::vector<Tensor> clips;
    std::vector<int> labels;
    for (int idx : S.corpus->split_indices("train")) {
        const auto& rec = S.corpus->clips[static_cast<size_t>(idx)];
        clips.push_back(dataset::load_clip(*S.corpus, rec).pose.frames);
        labels.push_back(rec.emotion);
    }
    const int pose_dim = clips.front().cols;
    S.classifier.emplace(metrics::ClassifierConfig{pose_dim, 16, 4}, 0xC1A55ULL);
    S.classifier->fit(clips, labels, 40, 0.01);

    std::vector<Tensor> real_test;
    std::vector<int> test_labels;
    for (const auto& tc : S.test) {
        real_test.push_back(tc.real);
        test_labels.push_back(tc.label);
    }
    const double sanity = S.classifier->accuracy_percent(real_test, test_labels);
    note("evaluation classifier: real held-out accuracy %.1f%% (fit in %.1f s)", sanity,
         now_s() - t0);
}

Eval evaluate_model(const pipeline::GestureModel& model) {
    ensure_classifier();
    const motion::SkeletonSpec skel = motion::SkeletonSpec::upper_body_16();
    const double fps = S.corpus->fps;
    Eval ev;
    std::vector<Tensor> gens;
    std::vector<int> labels;
    const size_t n = S.test.size();
    for (const auto& tc : S.test) {
        gens.push_back(model.generate(tc.mel, tc.initial, pipeline::EmotionMode::encoded));
        labels.push_back(tc.label);
    }
    for (size_t i = 0; i < n; ++i) {
        const TestClip& tc = S.test[i];
        const Tensor& g = gens[i];
        ev.l2 += metrics::l2_distance(tc.real, g);
        double abs_sum = 0.0;
        for (size_t k = 0; k < g.v.size(); ++k) abs_sum += std::fabs(tc.real.v[k] - g.v[k]);
        ev.rec += abs_sum / static_cast<double>(g.v.size());
        ev.ba_own += metrics::beat_align(tc.onsets, g, fps).score;
        // Pair with a clip half the split away: a different take, so its word
        // rhythm is genuinely foreign.
        ev.ba_shuf += metrics::beat_align(S.test[(i + n / 2) % n].onsets, g, fps).score;
        motion::PoseSequence seq;
        seq.frames = g;
        seq.fps = fps;
        ev.jerk += motion::mean_jerk(motion::forward_kinematics(seq, skel));
    }
    const double dn = static_cast<double>(n);
    ev.l2 /= dn;
    ev.rec /= dn;
    ev.ba_own /= dn;
    ev.ba_shuf /= dn;
    ev.jerk /= dn;
    ev.ea = S.classifier->accuracy_percent(gens, labels);
    return ev;
}

// Trains one desk-scale variant (or reuses its cached evaluation).  Only the
// full run "A" keeps its model alive for later criteria.
const Eval& ensure_run(const std::string& name,
                       const std::function<void(pipeline::ModelConfig&, training::TrainConfig&)>&
                           tweak = {}) {
    auto it = S.evals.find(name);
    if (it != S.evals.end()) return it->second;
    ensure_corpus();

    pipeline::ModelConfig mc;
    training::TrainConfig tc = training::TrainConfig::desk();
    tc.epochs = g_args.epochs;
    tc.seed = g_args.seed;
    if (tweak) tweak(mc, tc);

    const double t0 = now_s();
    auto model = std::make_unique<pipeline::GestureModel>(mc, S.vocab, tc.seed);
    training::train_main(*model, *S.corpus, tc, (S.work / ("run_" + name)).string());
    const double t1 = now_s();
    Eval ev = evaluate_model(*model);
    note("run %s: %d epochs in %.1f s | EA %.1f%%  L2 %.4f  rec %.4f  BA %.4f/%.4f  jerk %.5f",
         name.c_str(), tc.epochs, t1 - t0, ev.ea, ev.l2, ev.rec, ev.ba_own, ev.ba_shuf, ev.jerk);
    if (name == "A") S.model_a = std::move(model);
    return S.evals.emplace(name, ev).first->second;
}

void ensure_vae_on_a() {
    if (S.vae_done) return;
    ensure_run("A");
    training::TrainConfig tc = training::TrainConfig::desk();
    tc.epochs = g_args.vae_epochs;
    tc.lr = 2e-3;
    tc.seed = g_args.seed;
    const double t0 = now_s();
    training::train_vae_stage(*S.model_a, *S.corpus, tc, (S.work / "run_A").string());
    note("emotion sampler stage: %d epochs in %.1f s", tc.epochs, now_s() - t0);
    S.vae_done = true;
}

// ---------------------------------------------------------------------------
// Criterion 4: emotion control.  Criterion 5: beat alignment.
// Criterion 6: smoothing.  Criterion 7: prompting.
// ---------------------------------------------------------------------------

bool criterion_4() {
    const Eval& a = ensure_run("A");
    const Eval& b = ensure_run("B", [](pipeline::ModelConfig&, training::TrainConfig& tc) {
        tc.enable_emotion = false;
    });
    Tally t;
    note("emotion accuracy: full %.1f%%, emotion objective off %.1f%% (gap %.1f)", a.ea, b.ea,
         a.ea - b.ea);
    t.expect(a.ea >= 70.0, "held-out EA below 70%");
    t.expect(a.ea - b.ea >= 15.0, "EA gap below 15 points");
    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

bool criterion_5() {
    const Eval& a = ensure_run("A");
    const Eval& c = ensure_run("C", [](pipeline::ModelConfig&, training::TrainConfig& tc) {
        tc.enable_beat = false;
    });
    Tally t;
    note("beat alignment: own audio %.4f vs shuffled audio %.4f (gap %.4f)", a.ba_own, a.ba_shuf,
         a.ba_own - a.ba_shuf);
    note("beat objective: on %.4f vs off %.4f", a.ba_own, c.ba_own);
    t.expect(a.ba_own - a.ba_shuf >= 0.05, "own-vs-shuffled BA gap below 0.05");
    t.expect(a.ba_own >= c.ba_own, "beat objective decreased BA");
    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

bool criterion_6() {
    const Eval& a = ensure_run("A");
    const Eval& d = ensure_run("D", [](pipeline::ModelConfig&, training::TrainConfig& tc) {
        tc.enable_smooth = false;
    });
    Tally t;
    const double drop = (d.jerk - a.jerk) / d.jerk;
    const double rec_change = std::fabs(a.rec - d.rec) / d.rec;
    note("jerk: smooth on %.5f vs off %.5f (drop %.1f%%)", a.jerk, d.jerk, 100.0 * drop);
    note("held-out reconstruction: on %.4f vs off %.4f (change %.1f%%)", a.rec, d.rec,
         100.0 * rec_change);
    t.expect(drop >= 0.10, "jerk drop below 10%");
    t.expect(rec_change < 0.20, "reconstruction changed by 20% or more");
    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

bool criterion_7() {
    const Eval& a = ensure_run("A");
    const Eval& e = ensure_run("E", [](pipeline::ModelConfig& mc, training::TrainConfig&) {
        mc.prompt_mode = stp::PromptMode::zero_pad;
    });
    const Eval& f = ensure_run("F", [](pipeline::ModelConfig& mc, training::TrainConfig&) {
        mc.prompt_mode = stp::PromptMode::duplicate_pad;
    });
    Tally t;
    note("held-out L2: enhanced %.4f, duplicate pad %.4f, zero pad %.4f", a.l2, f.l2, e.l2);
    t.expect(a.l2 <= f.l2, "enhanced prompting worse than duplicate padding");
    t.expect(a.l2 < e.l2, "enhanced prompting not better than zero padding");
    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

// ---------------------------------------------------------------------------
// Criterion 8: diversity contract of the emotion sampler.
// ---------------------------------------------------------------------------

bool criterion_8() {
    ensure_run("A");
    ensure_vae_on_a();
    ensure_classifier();
    Tally t;

    // One representative held-out clip per emotion.
    std::vector<const TestClip*> picks(4, nullptr);
    for (const auto& tc : S.test)
        if (!picks[static_cast<size_t>(tc.label)]) picks[static_cast<size_t>(tc.label)] = &tc;

    int agree = 0, total = 0;
    for (int label = 0; label < 4; ++label) {
        const TestClip& tc = *picks[static_cast<size_t>(label)];
        Tensor g1 = S.model_a->generate(tc.mel, tc.initial, pipeline::EmotionMode::encoded);
        Tensor g2 = S.model_a->generate(tc.mel, tc.initial, pipeline::EmotionMode::encoded);
        const auto div0 = metrics::diversity({g1, g2}, 1);
        t.expect(div0.mean == 0.0, "encoded diversity not exactly 0");

        std::vector<Tensor> seeds;
        std::vector<int> want;
        for (int s = 0; s < 20; ++s) {
            Rng rng(Rng::derive(0xD1CEULL, static_cast<uint64_t>(label * 101 + s)));
            seeds.push_back(S.model_a->generate(tc.mel, tc.initial,
                                                pipeline::EmotionMode::sampled, label, &rng));
            want.push_back(label);
        }
        const auto div = metrics::diversity(seeds, 2);
        if (label == 0)
            note("sampled diversity (label %d): %.4f +/- %.4f", label, div.mean, div.ci95);
        t.expect(div.mean > 0.0, "sampled diversity not positive");
        t.expect(div.ci95 > 0.0, "sampled diversity CI not positive");

        const double acc = S.classifier->accuracy_percent(seeds, want);
        agree += static_cast<int>(std::lround(acc / 100.0 * 20.0));
        total += 20;
    }
    note("sampled outputs matching conditioning emotion: %d/%d (%.1f%%)", agree, total,
         100.0 * agree / total);
    t.expect(100.0 * agree / total >= 60.0, "sampled emotion agreement below 60%");

    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

// ---------------------------------------------------------------------------
// Criterion 9: bitwise reproducibility of the whole pipeline.
// ---------------------------------------------------------------------------

bool criterion_9() {
    Tally t;
    const fs::path base = S.work / "repro";
    dataset::SynthConfig sc;
    sc.n_takes = 12;
    auto corpus = dataset::generate_synthetic_corpus((base / "corpus").string(), sc, 515);
    auto vocab = training::build_vocabulary(corpus);

    training::TrainConfig tc = training::TrainConfig::desk();
    tc.epochs = 2;
    tc.seed = 5005;
    pipeline::ModelConfig mc;

    auto run_once = [&](const std::string& name, std::vector<training::LossRecord>& history,
                        uint64_t& cs_gen, uint64_t& cs_disc, uint64_t& cs_gen_after,
                        uint64_t& cs_disc_after) {
        pipeline::GestureModel model(mc, vocab, tc.seed);
        history = training::train_main(model, corpus, tc, (base / name).string()).history;
        cs_gen = model.generator_params().checksum();
        cs_disc = model.discriminator_params().checksum();
        training::TrainConfig vc = tc;
        vc.epochs = 2;
        vc.lr = 2e-3;
        training::train_vae_stage(model, corpus, vc, (base / name).string());
        cs_gen_after = model.generator_params().checksum();
        cs_disc_after = model.discriminator_params().checksum();

        const fs::path out = base / (name + "_gen");
        fs::create_directories(out);
        for (int idx : corpus.split_indices("test")) {
            const auto& rec = corpus.clips[static_cast<size_t>(idx)];
            dataset::LoadedClip lc = dataset::load_clip(corpus, rec);
            Tensor initial(mc.m_initial, lc.pose.frames.cols);
            for (int r = 0; r < mc.m_initial; ++r)
                for (int c = 0; c < lc.pose.frames.cols; ++c) initial(r, c) = lc.pose.frames(r, c);
            motion::PoseSequence seq;
            seq.frames = model.generate(audio::compute_mel(lc.audio), initial,
                                        pipeline::EmotionMode::encoded);
            seq.fps = corpus.fps;
            motion::save_pose_clip((out / rec.id).string(), seq);
        }
    };

    std::vector<training::LossRecord> h1, h2;
    uint64_t g1, d1, g1a, d1a, g2, d2, g2a, d2a;
    run_once("r1", h1, g1, d1, g1a, d1a);
    run_once("r2", h2, g2, d2, g2a, d2a);

    t.expect(h1.size() == h2.size() && !h1.empty(), "loss history sizes differ");
    double worst_rel = 0.0;
    for (size_t i = 0; i < std::min(h1.size(), h2.size()); ++i) {
        t.expect(h1[i].name == h2[i].name && h1[i].step == h2[i].step, "history order differs");
        worst_rel = std::max(worst_rel, std::fabs(h1[i].value - h2[i].value) /
                                            std::max(1.0, std::fabs(h1[i].value)));
    }
    note("same-seed loss histories: %zu entries, worst relative gap %.3e", h1.size(), worst_rel);
    t.expect(worst_rel <= 1e-6, "loss histories differ beyond 1e-6 relative");

    int files = 0;
    bool all_equal = true;
    for (const auto& entry : fs::directory_iterator(base / "r1_gen")) {
        const fs::path other = base / "r2_gen" / entry.path().filename();
        std::ifstream f1(entry.path(), std::ios::binary), f2(other, std::ios::binary);
        std::string b1((std::istreambuf_iterator<char>(f1)), {});
        std::string b2((std::istreambuf_iterator<char>(f2)), {});
        all_equal = all_equal && !b1.empty() && b1 == b2;
        ++files;
    }
    note("encoded pose files: %d compared, %s", files,
         all_equal ? "bit-identical" : "DIFFERENT");
    t.expect(files > 0 && all_equal, "generated pose files differ between same-seed runs");

    t.expect(g1 == g1a && d1 == d1a && g2 == g2a && d2 == d2a,
             "sampler stage changed the backbone checksum");
    note("backbone checksums across the sampler stage: %s",
         (g1 == g1a && d1 == d1a) ? "unchanged" : "CHANGED");

    if (!t.ok()) note("first failure: %s", t.first.c_str());
    return t.ok();
}

// ---------------------------------------------------------------------------
// Criterion 10: the CLI end to end.
// ---------------------------------------------------------------------------

bool criterion_10() {
    Tally t;
    const fs::path base = S.work / "smoke";
    fs::create_directories(base);
    const std::string log = (base / "cli.log").string();
    auto run = [&](const std::string& args) {
        const std::string cmd = g_args.cli + " " + args + " >> " + log + " 2>&1";
        const int rc = std::system(cmd.c_str());
        const int code = rc < 0 ? rc : WEXITSTATUS(rc);
        t.expect(code == 0, "command failed (exit " + std::to_string(code) + "): " + args);
        return code == 0;
    };

    const std::string c = (base / "corpus").string();
    const std::string r = (base / "run").string();
    const std::string g = (base / "gen").string();
    const double t0 = now_s();
    bool ok = run("prepare --out " + c + " --takes 12 --seed 5");
    ok = ok && run("train --corpus " + c + " --out " + r + " --epochs 2 --batch 16 --seed 5");
    ok = ok && run("train-vae --corpus " + c + " --run " + r + " --epochs 2 --seed 5");
    ok = ok && run("generate --corpus " + c + " --checkpoint " + r + "/checkpoint.ckpt --out " + g +
                   " --split test --mode sampled --samples 5 --seed 5");
    ok = ok && run("evaluate --corpus " + c + " --generated " + g + " --split test");
    const double elapsed = now_s() - t0;
    note("prepare -> train -> train-vae -> generate -> evaluate: %.1f s (budget 600)", elapsed);
    t.expect(elapsed < 600.0, "CLI chain exceeded 10 minutes");

    if (ok) {
        try {
            json cfg = json::parse(std::ifstream(r + "/train_config.json"));
            t.expect(cfg.at("epochs").get<int>() == 2, "train_config.json epochs wrong");
            std::ifstream csv(r + "/losses.csv");
            std::string header;
            std::getline(csv, header);
            t.expect(header == "step,loss_name,value", "losses.csv header wrong");
            t.expect(fs::exists(r + "/vae_losses.csv"), "vae_losses.csv missing");

            json metrics = json::parse(std::ifstream(g + "/metrics.json"));
            for (const char* key : {"l2", "mpjre_deg", "fgd", "ba", "ea_percent", "diversity_mean",
                                    "diversity_ci95", "n_reference", "n_generated"}) {
                t.expect(metrics.contains(key), std::string("metrics.json missing ") + key);
                if (metrics.contains(key) && metrics.at(key).is_number())
                    t.expect(std::isfinite(metrics.at(key).get<double>()),
                             std::string("metrics.json non-finite ") + key);
            }

            int sidecars = 0;
            for (const auto& entry : fs::directory_iterator(g)) {
                if (entry.path().extension() != ".json" ||
                    entry.path().filename() == "metrics.json")
                    continue;
                json side = json::parse(std::ifstream(entry.path()));
                const int frames = side.at("n_frames").get<int>();
                const int joints = side.at("n_joints").get<int>();
                t.expect(side.at("dtype").get<std::string>() == "f32le", "sidecar dtype wrong");
                fs::path raw = entry.path();
                raw.replace_extension(".f32");
                t.expect(fs::file_size(raw) ==
                             static_cast<uintmax_t>(frames) * joints * 6 * sizeof(float),
                         "pose payload size disagrees with its sidecar");
                ++sidecars;
            }
            note("schema checks: metrics.json, train_config.json, losses.csv, %d pose sidecars",
                 sidecars);
            t.expect(sidecars > 0, "no generated pose clips found");
        } catch (const std::exception& e) {
            t.expect(false, std::string("schema validation threw: ") + e.what());
        }
    }

    if (!t.ok()) note("first failure: %s (log: %s)", t.first.c_str(), log.c_str());
    return t.ok();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gate for the gesture generation pipeline"};
    app.add_option("cli", g_args.cli, "path to the command-line binary")->required();
    app.add_option("--work", g_args.work, "scratch directory")->capture_default_str();
    app.add_option("--epochs", g_args.epochs, "epochs per behavioral run")->capture_default_str();
    app.add_option("--vae-epochs", g_args.vae_epochs, "emotion sampler epochs")
        ->capture_default_str();
    app.add_option("--takes", g_args.takes, "takes in the behavioral corpus")
        ->capture_default_str();
    app.add_option("--seed", g_args.seed, "training seed")->capture_default_str();
    app.add_option("--only", g_args.only, "run only these criterion numbers");
    app.add_flag("--keep", g_args.keep, "keep the scratch directory on success");
    CLI11_PARSE(app, argc, argv);

    S.work = fs::path(g_args.work);
    fs::remove_all(S.work);
    fs::create_directories(S.work);

    const std::vector<std::pair<const char*, bool (*)()>> criteria = {
        {"numerical core: rotations, prompt closed form, loss gradients", criterion_1},
        {"loss identities at special points", criterion_2},
        {"metric oracles: beat score, frechet, diversity", criterion_3},
        {"emotion control: held-out EA and objective ablation", criterion_4},
        {"beat alignment: shuffled-audio gap and objective ablation", criterion_5},
        {"smoothing: jerk drop at stable reconstruction", criterion_6},
        {"prompting: enhanced vs padding baselines", criterion_7},
        {"diversity contract of the emotion sampler", criterion_8},
        {"bitwise same-seed reproducibility", criterion_9},
        {"CLI end to end under ten minutes", criterion_10},
    };

    const double suite_t0 = now_s();
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const int num = static_cast<int>(i) + 1;
        if (!g_args.only.empty() &&
            std::find(g_args.only.begin(), g_args.only.end(), num) == g_args.only.end())
            continue;
        bool ok = false;
        try {
            ok = criteria[i].second();
        } catch (const std::exception& e) {
            note("threw: %s", e.what());
        }
        std::printf("[%s] %2d. %s\n", ok ? "PASS" : "FAIL", num, criteria[i].first);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("acceptance: %d criterion(s) failed, total %.1f s\n", failures,
                now_s() - suite_t0);

    if (failures == 0 && !g_args.keep)
        fs::remove_all(S.work);
    else if (failures != 0)
        std::printf("scratch kept at %s\n", S.work.string().c_str());
    return failures == 0 ? 0 : 1;
}
