#include "attackmap/classifiers.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "attackmap/errors.hpp"
#include "attackmap/objectives.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ClassifierKind, std::string_view>, 6> kKindNames{{
    {ClassifierKind::multinomial_nb, "multinomial_nb"},
    {ClassifierKind::complement_nb, "complement_nb"},
    {ClassifierKind::logreg, "logreg"},
    {ClassifierKind::linsvm_ovr, "linsvm_ovr"},
    {ClassifierKind::linsvm_ovo, "linsvm_ovo"},
    {ClassifierKind::mlp, "mlp"},
}};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Runs fn(i) for i in [0, n) on a small worker pool. Every index writes
/// only its own output slot, so the result does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
    std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<bool> present_mask(const Matrix& present) {
    std::vector<bool> mask(present.data.size());
    for (std::size_t c = 0; c < mask.size(); ++c) mask[c] = present.data[c] != 0.0;
    return mask;
}

// ---------------------------------------------------------------------------
// Naive Bayes

ParameterSet fit_naive_bayes(const std::vector<FeatureVector>& X, const std::vector<std::size_t>& y,
                             std::size_t n_classes, std::size_t dim, const ClassWeights& cw, double alpha,
                             bool complement) {
    Matrix counts(n_classes, dim);
    std::vector<double> class_mass(n_classes, 0.0);
    Matrix present(1, n_classes);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double w = cw.weights[y[i]];
        present.data[y[i]] = 1.0;
        class_mass[y[i]] += w;
        for (const auto& e : X[i].entries) counts(y[i], e.index) += w * e.weight;
    }
    const double total_mass = std::accumulate(class_mass.begin(), class_mass.end(), 0.0);

    Matrix log_prior(1, n_classes);
    Matrix flp(n_classes, dim);
    std::vector<double> feature_all(dim, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < dim; ++j) feature_all[j] += counts(c, j);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (present.data[c] != 0.0 && class_mass[c] > 0.0) log_prior.data[c] = std::log(class_mass[c] / total_mass);
        double row_total = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double v = complement ? feature_all[j] - counts(c, j) : counts(c, j);
            flp(c, j) = v + alpha;
            row_total += flp(c, j);
        }
        const double log_total = std::log(row_total);
        for (std::size_t j = 0; j < dim; ++j) {
            const double logged = std::log(flp(c, j)) - log_total;
            flp(c, j) = complement ? -logged : logged;
        }
    }
    return {{"feature_log_prob", std::move(flp)}, {"log_prior", std::move(log_prior)}, {"present", std::move(present)}};
}

std::vector<double> naive_bayes_proba(const ClassifierModel& model, const FeatureVector& x, bool complement) {
    const Matrix& flp = model.parameter("feature_log_prob");
    const Matrix& prior = model.parameter("log_prior");
    const auto mask = present_mask(model.parameter("present"));
    const std::size_t C = model.n_classes();
    const std::size_t n_present = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    std::vector<double> s(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        if (!mask[c]) continue;
        double acc = (!complement || n_present == 1) ? prior.data[c] : 0.0;
        for (const auto& e : x.entries) acc += e.weight * flp(c, e.index);
        s[c] = acc;
    }
    softmax_inplace(s, mask);
    return s;
}

// ---------------------------------------------------------------------------
// Logistic regression

ParameterSet fit_logreg(const std::vector<FeatureVector>& X, const std::vector<std::size_t>& y,
                        std::size_t n_classes, std::size_t dim, const ClassWeights& cw, const ClassifierSpec& spec,
                        TrainingTrace* trace) {
    WeightedSamples data{&X, y, {}, dim, n_classes};
    data.sample_weights.reserve(y.size());
    for (auto label : y) data.sample_weights.push_back(cw.weights[label]);
    LogRegObjective objective(std::move(data), spec.hp("l2"));

    const std::size_t n = objective.n_params();
    std::vector<double> theta(n, 0.0), grad(n), trial(n), trial_grad(n);
    double loss = objective.evaluate(theta, grad);
    if (trace) trace->losses.push_back(loss);
    double step = spec.hp("initial_step");
    const double tol = spec.hp("tol");
    const auto max_epochs = static_cast<std::size_t>(spec.hp("max_epochs"));
    std::size_t epoch = 0;
    for (; epoch < max_epochs; ++epoch) {
        double grad_sq = 0.0;
        for (double g : grad) grad_sq += g * g;
        for (std::size_t k = 0; k < n; ++k) trial[k] = theta[k] - step * grad[k];
        const double trial_loss = objective.evaluate(trial, trial_grad);
        // sufficient decrease (Armijo, c = 1e-4); rejected steps are halved
        if (trial_loss > loss - 1e-4 * step * grad_sq) {
            step *= 0.5;
            if (step < 1e-14) break;
            continue;
        }
        // next trial step: Barzilai-Borwein ratio s.s / s.y
        double ss = 0.0, sy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double sk = trial[k] - theta[k];
            ss += sk * sk;
            sy += sk * (trial_grad[k] - grad[k]);
        }
        const double delta = loss - trial_loss;
        theta.swap(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        if (trace) trace->losses.push_back(loss);
        if (delta < tol) break;
        step = sy > 0.0 ? ss / sy : step * 2.0;
    }
    if (trace) trace->epochs = epoch;

    Matrix coef(dim, n_classes);
    Matrix intercept(1, n_classes);
    std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(dim * n_classes), coef.data.begin());
    std::copy(theta.begin() + static_cast<std::ptrdiff_t>(dim * n_classes), theta.end(), intercept.data.begin());
    return {{"coef", std::move(coef)}, {"intercept", std::move(intercept)}};
}

std::vector<double> linear_scores(const ClassifierModel& model, const FeatureVector& x) {
    const Matrix& coef = model.parameter("coef");
    const Matrix& intercept = model.parameter("intercept");
    std::vector<double> s = intercept.data;
    const std::size_t C = model.n_classes();
    for (const auto& e : x.entries) {
        const double* row = coef.data.data() + static_cast<std::size_t>(e.index) * C;
        for (std::size_t c = 0; c < C; ++c) s[c] += e.weight * row[c];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Linear SVM: dual coordinate descent for the L2-regularized hinge loss with
// shrinking. The bias is an extra feature fixed at 1.

struct BinaryProblem {
    const std::vector<FeatureVector>* X;
    std::vector<std::size_t> rows;
    std::vector<signed char> sign;
    std::vector<double> upper;
};

std::vector<double> solve_binary_svm(const BinaryProblem& p, std::size_t dim, double tol, std::size_t max_epochs,
                                     Rng& rng) {
    const std::size_t n = p.rows.size();
    std::vector<double> w(dim + 1, 0.0);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) qd[i] = (*p.X)[p.rows[i]].squared_norm() + 1.0;

    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), 0);
    std::size_t active_size = n;
    double pg_max_old = std::numeric_limits<double>::infinity();
    double pg_min_old = -std::numeric_limits<double>::infinity();
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        for (std::size_t i = active_size; i > 1; --i) {
            std::swap(active[i - 1], active[static_cast<std::size_t>(rng.below(i))]);
        }
        double pg_max_new = -inf;
        double pg_min_new = inf;
        for (std::size_t s = 0; s < active_size; ++s) {
            const std::size_t i = active[s];
            const auto& x = (*p.X)[p.rows[i]];
            const double yi = p.sign[i];
            const double g = yi * (x.dot(w) + w[dim]) - 1.0;
            const double u = p.upper[i];
            double pg = 0.0;
            if (alpha[i] == 0.0) {
                if (g > pg_max_old) {
                    --active_size;
                    std::swap(active[s], active[active_size]);
                    --s;
                    continue;
                }
                if (g < 0.0) pg = g;
            } else if (alpha[i] == u) {
                if (g < pg_min_old) {
                    --active_size;
                    std::swap(active[s], active[active_size]);
                    --s;
                    continue;
                }
                if (g > 0.0) pg = g;
            } else {
                pg = g;
            }
            pg_max_new = std::max(pg_max_new, pg);
            pg_min_new = std::min(pg_min_new, pg);
            if (std::abs(pg) > 1e-12) {
                const double old = alpha[i];
                alpha[i] = std::min(std::max(alpha[i] - g / qd[i], 0.0), u);
                const double d = (alpha[i] - old) * yi;
                for (const auto& e : x.entries) w[e.index] += d * e.weight;
                w[dim] += d;
            }
        }
        if (pg_max_new - pg_min_new <= tol) {
            if (active_size == n) break;
            active_size = n;
            pg_max_old = inf;
            pg_min_old = -inf;
            continue;
        }
        pg_max_old = pg_max_new <= 0.0 ? inf : pg_max_new;
        pg_min_old = pg_min_new >= 0.0 ? -inf : pg_min_new;
    }
    return w;
}

ParameterSet fit_svm_ovr(const std::vector<FeatureVector>& X, const std::vector<std::size_t>& y, std::size_t n_classes,
                         std::size_t dim, const ClassWeights& cw, const ClassifierSpec& spec) {
    const double C = spec.hp("C");
    const double tol = spec.hp("tol");
    const auto max_epochs = static_cast<std::size_t>(spec.hp("max_epochs"));
    Matrix coef(dim, n_classes);
    Matrix intercept(1, n_classes);
    parallel_for(n_classes, [&](std::size_t c) {
        BinaryProblem p{&X, {}, {}, {}};
        p.rows.resize(X.size());
        std::iota(p.rows.begin(), p.rows.end(), 0);
        for (std::size_t i = 0; i < X.size(); ++i) {
            const bool pos = y[i] == c;
            p.sign.push_back(pos ? 1 : -1);
            p.upper.push_back(pos ? C * cw.weights[c] : C);
        }
        Rng rng(mix_seed(spec.seed(), c));
        auto w = solve_binary_svm(p, dim, tol, max_epochs, rng);
        for (std::size_t j = 0; j < dim; ++j) coef(j, c) = w[j];
        intercept.data[c] = w[dim];
    });
    return {{"coef", std::move(coef)}, {"intercept", std::move(intercept)}};
}

ParameterSet fit_svm_ovo(const std::vector<FeatureVector>& X, const std::vector<std::size_t>& y, std::size_t n_classes,
                         std::size_t dim, const ClassWeights& cw, const ClassifierSpec& spec) {
    const double C = spec.hp("C");
    const double tol = spec.hp("tol");
    const auto max_epochs = static_cast<std::size_t>(spec.hp("max_epochs"));

    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    Matrix present(1, n_classes);
    std::vector<std::size_t> classes;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (!by_class[c].empty()) {
            present.data[c] = 1.0;
            classes.push_back(c);
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) pairs.emplace_back(classes[a], classes[b]);
    }

    std::vector<std::vector<FeatureVector::Entry>> weights(pairs.size());
    std::vector<double> biases(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [a, b] = pairs[k];
        BinaryProblem p{&X, {}, {}, {}};
        std::merge(by_class[a].begin(), by_class[a].end(), by_class[b].begin(), by_class[b].end(),
                   std::back_inserter(p.rows));
        for (auto i : p.rows) {
            const bool pos = y[i] == a;
            p.sign.push_back(pos ? 1 : -1);
            p.upper.push_back(C * cw.weights[y[i]]);
        }
        Rng rng(mix_seed(spec.seed(), k));
        auto w = solve_binary_svm(p, dim, tol, max_epochs, rng);
        for (std::size_t j = 0; j < dim; ++j) {
            if (w[j] != 0.0) weights[k].push_back({static_cast<std::uint32_t>(j), w[j]});
        }
        biases[k] = w[dim];
    });

    Matrix pair_classes(pairs.size(), 2);
    Matrix intercept(1, pairs.size());
    Matrix indptr(1, pairs.size() + 1);
    Matrix indices, values;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        pair_classes(k, 0) = static_cast<double>(pairs[k].first);
        pair_classes(k, 1) = static_cast<double>(pairs[k].second);
        intercept.data[k] = biases[k];
        for (const auto& e : weights[k]) {
            indices.data.push_back(e.index);
            values.data.push_back(e.weight);
        }
        indptr.data[k + 1] = static_cast<double>(indices.data.size());
    }
    indices.rows = values.rows = 1;
    indices.cols = values.cols = indices.data.size();
    return {{"pairs", std::move(pair_classes)}, {"pair_intercept", std::move(intercept)},
            {"pair_indptr", std::move(indptr)}, {"pair_indices", std::move(indices)},
            {"pair_values", std::move(values)}, {"present", std::move(present)}};
}

struct OvoTally {
    std::vector<double> votes;
    std::vector<double> margins;
};

OvoTally ovo_tally(const ClassifierModel& model, const FeatureVector& x) {
    const Matrix& pairs = model.parameter("pairs");
    const Matrix& intercept = model.parameter("pair_intercept");
    const Matrix& indptr = model.parameter("pair_indptr");
    const Matrix& indices = model.parameter("pair_indices");
    const Matrix& values = model.parameter("pair_values");
    std::vector<double> dense(model.tfidf().dim(), 0.0);
    for (const auto& e : x.entries) dense[e.index] = e.weight;
    OvoTally t{std::vector<double>(model.n_classes(), 0.0), std::vector<double>(model.n_classes(), 0.0)};
    for (std::size_t k = 0; k < pairs.rows; ++k) {
        double m = intercept.data[k];
        const auto from = static_cast<std::size_t>(indptr.data[k]);
        const auto to = static_cast<std::size_t>(indptr.data[k + 1]);
        for (std::size_t q = from; q < to; ++q) m += values.data[q] * dense[static_cast<std::size_t>(indices.data[q])];
        const auto a = static_cast<std::size_t>(pairs(k, 0));
        const auto b = static_cast<std::size_t>(pairs(k, 1));
        t.votes[m > 0.0 ? a : b] += 1.0;
        t.margins[a] += m;
        t.margins[b] -= m;
    }
    return t;
}

// ---------------------------------------------------------------------------
// MLP

/// Per class, floor(n_c * fraction) samples go to validation; singleton
/// classes never do. Returns (train, validation) index lists, ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(const std::vector<std::size_t>& y,
                                                                                 std::size_t n_classes,
                                                                                 double fraction, Rng& rng) {
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    std::vector<bool> held(y.size(), false);
    for (auto& members : by_class) {
        if (members.size() < 2) continue;
        const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * fraction + 1e-9));
        rng.shuffle(members);
        for (std::size_t k = 0; k < n_val; ++k) held[members[k]] = true;
    }
    std::vector<std::size_t> train, val;
    for (std::size_t i = 0; i < y.size(); ++i) (held[i] ? val : train).push_back(i);
    return {train, val};
}

ParameterSet fit_mlp(const std::vector<FeatureVector>& X, const std::vector<std::size_t>& y, std::size_t n_classes,
                     std::size_t dim, const ClassWeights& cw, const ClassifierSpec& spec, TrainingTrace* trace) {
    const auto H = static_cast<std::size_t>(spec.hp("hidden_units"));
    const double lr = spec.hp("learning_rate");
    const double beta1 = spec.hp("beta1");
    const double beta2 = spec.hp("beta2");
    const double eps = spec.hp("epsilon");
    const double tol = spec.hp("tol");
    const auto batch_size = static_cast<std::size_t>(spec.hp("batch_size"));
    const auto patience = static_cast<std::size_t>(spec.hp("patience"));
    const auto max_epochs = static_cast<std::size_t>(spec.hp("max_epochs"));
    if (H == 0 || batch_size == 0) throw TrainError("hidden_units and batch_size must be positive");

    Rng rng(spec.seed());
    auto [train_idx, val_idx] = stratified_holdout(y, n_classes, spec.hp("validation_fraction"), rng);
    const bool early_stopping = !val_idx.empty() && !train_idx.empty();
    if (!early_stopping) {
        train_idx.resize(y.size());
        std::iota(train_idx.begin(), train_idx.end(), 0);
        val_idx.clear();
    }

    WeightedSamples data{&X, y, {}, dim, n_classes};
    for (auto label : y) data.sample_weights.push_back(cw.weights[label]);
    MlpObjective objective(std::move(data), H, spec.hp("l2"));

    const std::size_t n = objective.n_params();
    std::vector<double> theta(n);
    {
        const double bound1 = std::sqrt(6.0 / static_cast<double>(dim + H));
        const double bound2 = std::sqrt(6.0 / static_cast<double>(H + n_classes));
        const std::size_t layer1 = dim * H + H;
        for (std::size_t k = 0; k < n; ++k) {
            const double b = k < layer1 ? bound1 : bound2;
            theta[k] = rng.uniform(-b, b);
        }
    }

    std::vector<double> grad(n), m(n, 0.0), v(n, 0.0);
    std::vector<double> best = theta;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    std::uint64_t t = 0;
    std::size_t epoch = 0;
    for (; epoch < max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += batch_size) {
            const std::size_t stop = std::min(start + batch_size, train_idx.size());
            std::span<const std::size_t> batch(train_idx.data() + start, stop - start);
            epoch_loss += objective.evaluate_batch(theta, grad, batch) * static_cast<double>(batch.size());
            ++t;
            const double lr_t = lr * std::sqrt(1.0 - std::pow(beta2, static_cast<double>(t))) /
                                (1.0 - std::pow(beta1, static_cast<double>(t)));
            for (std::size_t k = 0; k < n; ++k) {
                m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
                theta[k] -= lr_t * m[k] / (std::sqrt(v[k]) + eps);
            }
        }
        if (trace) trace->losses.push_back(epoch_loss / static_cast<double>(train_idx.size()));
        if (!early_stopping) continue;

        const double score = -objective.evaluate_batch(theta, {}, val_idx);
        if (score < best_score + tol) {
            ++stale;
        } else {
            stale = 0;
        }
        if (score > best_score) {
            best_score = score;
            best = theta;
        }
        if (stale >= patience) {
            ++epoch;
            break;
        }
    }
    if (trace) trace->epochs = epoch;
    if (early_stopping) theta = best;

    Matrix w1(dim, H), b1(1, H), w2(H, n_classes), b2(1, n_classes);
    auto it = theta.begin();
    auto take = [&](Matrix& mat) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(mat.data.size()), mat.data.begin());
        it += static_cast<std::ptrdiff_t>(mat.data.size());
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
    return {{"hidden_coef", std::move(w1)}, {"hidden_intercept", std::move(b1)},
            {"output_coef", std::move(w2)}, {"output_intercept", std::move(b2)}};
}

std::vector<double> mlp_scores(const ClassifierModel& model, const FeatureVector& x) {
    const Matrix& w1 = model.parameter("hidden_coef");
    const Matrix& b1 = model.parameter("hidden_intercept");
    const Matrix& w2 = model.parameter("output_coef");
    const Matrix& b2 = model.parameter("output_intercept");
    const std::size_t H = w1.cols;
    const std::size_t C = model.n_classes();
    std::vector<double> a = b1.data;
    for (const auto& e : x.entries) {
        const double* row = w1.data.data() + static_cast<std::size_t>(e.index) * H;
        for (std::size_t h = 0; h < H; ++h) a[h] += e.weight * row[h];
    }
    std::vector<double> s = b2.data;
    for (std::size_t h = 0; h < H; ++h) {
        if (a[h] <= 0.0) continue;
        const double* row = w2.data.data() + h * C;
        for (std::size_t c = 0; c < C; ++c) s[c] += a[h] * row[c];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Serialization helpers

json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", format_decimals(m.data)}};
}

Matrix matrix_from_json(const json& doc) {
    Matrix m;
    m.rows = doc.at("rows").get<std::size_t>();
    m.cols = doc.at("cols").get<std::size_t>();
    m.data = parse_decimals(doc.at("data").get<std::vector<std::string>>());
    if (m.data.size() != m.rows * m.cols) throw FormatError("parameter array size does not match its shape");
    return m;
}

json prep_to_json(const PrepConfig& p) {
    return {{"lowercase", p.lowercase}, {"stopword_list_id", p.stopword_list_id}, {"stem", p.stem},
            {"min_token_len", p.min_token_len}};
}

PrepConfig prep_from_json(const json& doc) {
    PrepConfig p;
    p.lowercase = doc.at("lowercase").get<bool>();
    p.stopword_list_id = doc.at("stopword_list_id").get<std::string>();
    p.stem = doc.at("stem").get<bool>();
    p.min_token_len = doc.at("min_token_len").get<std::size_t>();
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(ClassifierKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

ClassifierKind classifier_kind_from_string(std::string_view text) {
    for (const auto& [k, name] : kKindNames) {
        if (name == text) return k;
    }
    throw ArgumentError("unknown classifier kind '" + std::string(text) + "'");
}

std::map<std::string, double> ClassifierSpec::defaults(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::multinomial_nb:
        case ClassifierKind::complement_nb:
            return {{"alpha", 1.0}};
        case ClassifierKind::logreg:
            return {{"l2", 1e-4}, {"tol", 1e-6}, {"max_epochs", 1000}, {"initial_step", 1.0}};
        case ClassifierKind::linsvm_ovr:
        case ClassifierKind::linsvm_ovo:
            return {{"C", 1.0}, {"tol", 1e-3}, {"max_epochs", 1000}};
        case ClassifierKind::mlp:
            return {{"hidden_units", 100}, {"learning_rate", 1e-3}, {"batch_size", 200},
                    {"l2", 1e-4},          {"validation_fraction", 0.1}, {"patience", 10},
                    {"max_epochs", 200},   {"tol", 1e-4},           {"beta1", 0.9},
                    {"beta2", 0.999},      {"epsilon", 1e-8}};
    }
    return {};
}

ClassifierSpec::ClassifierSpec(ClassifierKind kind, bool balanced, std::uint64_t seed,
                               const std::map<std::string, double>& overrides)
    : kind_(kind), balanced_(balanced), seed_(seed), hyperparams_(defaults(kind)) {
    for (const auto& [key, value] : overrides) {
        auto it = hyperparams_.find(key);
        if (it == hyperparams_.end()) {
            throw ArgumentError("hyperparameter '" + key + "' does not apply to " + std::string(to_string(kind)));
        }
        if (!std::isfinite(value)) throw ArgumentError("hyperparameter '" + key + "' must be finite");
        it->second = value;
    }
}

double ClassifierSpec::hp(const std::string& key) const {
    auto it = hyperparams_.find(key);
    if (it == hyperparams_.end()) throw ArgumentError("missing hyperparameter '" + key + "'");
    return it->second;
}

json ClassifierSpec::to_json() const {
    json hp = json::object();
    for (const auto& [k, v] : hyperparams_) hp[k] = format_decimal(v);
    return {{"kind", to_string(kind_)}, {"balanced", balanced_}, {"seed", seed_}, {"hyperparams", hp}};
}

ClassifierSpec ClassifierSpec::from_json(const json& doc) {
    std::map<std::string, double> overrides;
    for (const auto& [k, v] : doc.at("hyperparams").items()) overrides[k] = parse_decimal(v.get<std::string>());
    return ClassifierSpec(classifier_kind_from_string(doc.at("kind").get<std::string>()),
                          doc.at("balanced").get<bool>(), doc.at("seed").get<std::uint64_t>(), overrides);
}

ClassWeights compute_class_weights(const std::vector<std::size_t>& class_counts, bool balanced) {
    std::size_t total = 0, present = 0;
    for (auto n : class_counts) {
        total += n;
        if (n > 0) ++present;
    }
    if (total == 0) throw ArgumentError("class counts sum to zero");
    ClassWeights cw;
    cw.weights.assign(class_counts.size(), 1.0);
    if (!balanced) return cw;
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        cw.weights[c] = class_counts[c] == 0 ? 0.0
                                             : static_cast<double>(total) /
                                                   (static_cast<double>(present) * static_cast<double>(class_counts[c]));
    }
    return cw;
}

// ---------------------------------------------------------------------------

ClassifierModel::ClassifierModel(ClassifierSpec spec, ModelContext context, ParameterSet parameters)
    : spec_(std::move(spec)), context_(std::move(context)), parameters_(std::move(parameters)) {
    validate();
}

const Matrix& ClassifierModel::parameter(const std::string& name) const {
    auto it = parameters_.find(name);
    if (it == parameters_.end()) throw FormatError("model is missing parameter '" + name + "'");
    return it->second;
}

std::size_t ClassifierModel::binary_model_count() const {
    switch (spec_.kind()) {
        case ClassifierKind::linsvm_ovr: return n_classes();
        case ClassifierKind::linsvm_ovo: return parameter("pairs").rows;
        default: return 0;
    }
}

void ClassifierModel::validate() const {
    const std::size_t C = n_classes();
    const std::size_t D = context_.tfidf.dim();
    if (C == 0) throw FormatError("model has no classes");
    auto expect = [&](const std::string& name, std::size_t rows, std::size_t cols) {
        const Matrix& m = parameter(name);
        if (m.rows != rows || m.cols != cols) {
            throw FormatError("parameter '" + name + "' has shape " + std::to_string(m.rows) + "x" +
                              std::to_string(m.cols) + ", expected " + std::to_string(rows) + "x" +
                              std::to_string(cols));
        }
    };
    switch (spec_.kind()) {
        case ClassifierKind::multinomial_nb:
        case ClassifierKind::complement_nb:
            expect("feature_log_prob", C, D);
            expect("log_prior", 1, C);
            expect("present", 1, C);
            break;
        case ClassifierKind::logreg:
        case ClassifierKind::linsvm_ovr:
            expect("coef", D, C);
            expect("intercept", 1, C);
            break;
        case ClassifierKind::linsvm_ovo: {
            const std::size_t P = parameter("pairs").rows;
            expect("pairs", P, 2);
            expect("pair_intercept", 1, P);
            expect("pair_indptr", 1, P + 1);
            expect("present", 1, C);
            const std::size_t nnz = parameter("pair_values").data.size();
            expect("pair_indices", 1, nnz);
            const auto& indptr = parameter("pair_indptr").data;
            if (indptr.front() != 0.0 || indptr.back() != static_cast<double>(nnz) ||
                !std::is_sorted(indptr.begin(), indptr.end())) {
                throw FormatError("pair_indptr is inconsistent");
            }
            for (double idx : parameter("pair_indices").data) {
                if (idx < 0 || idx >= static_cast<double>(D)) throw FormatError("pair index out of range");
            }
            for (double c : parameter("pairs").data) {
                if (c < 0 || c >= static_cast<double>(C)) throw FormatError("pair class out of range");
            }
            break;
        }
        case ClassifierKind::mlp: {
            const std::size_t H = parameter("hidden_coef").cols;
            expect("hidden_coef", D, H);
            expect("hidden_intercept", 1, H);
            expect("output_coef", H, C);
            expect("output_intercept", 1, C);
            break;
        }
    }
    for (const auto& [name, m] : parameters_) {
        for (double v : m.data) {
            if (!std::isfinite(v)) throw FormatError("parameter '" + name + "' holds a non-finite value");
        }
    }
}

json ClassifierModel::to_json() const {
    json params = json::object();
    for (const auto& [name, m] : parameters_) params[name] = matrix_to_json(m);
    return {{"format_version", kFormatVersion},
            {"kind", "attackmap.model"},
            {"registry_fingerprint", context_.registry_fingerprint},
            {"spec", spec_.to_json()},
            {"classes", context_.classes},
            {"prep", prep_to_json(context_.prep)},
            {"tfidf", context_.tfidf.to_json()},
            {"parameters", params},
            {"provenance", context_.provenance}};
}

ClassifierModel ClassifierModel::from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("format_version")) throw FormatError("not a model bundle");
    const auto& version = doc.at("format_version");
    if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
        throw FormatError("unsupported model format_version " + version.dump() + " (expected " +
                          std::to_string(kFormatVersion) + ")");
    }
    try {
        ModelContext ctx;
        ctx.classes = doc.at("classes").get<std::vector<std::string>>();
        ctx.registry_fingerprint = doc.at("registry_fingerprint").get<std::string>();
        ctx.prep = prep_from_json(doc.at("prep"));
        ctx.tfidf = TfidfModel::from_json(doc.at("tfidf"));
        ctx.provenance = doc.value("provenance", json::object());
        ParameterSet params;
        for (const auto& [name, m] : doc.at("parameters").items()) params.emplace(name, matrix_from_json(m));
        return ClassifierModel(ClassifierSpec::from_json(doc.at("spec")), std::move(ctx), std::move(params));
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model bundle: ") + e.what());
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("malformed model bundle: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

ClassifierModel train(const std::vector<FeatureVector>& features, const std::vector<std::size_t>& labels,
                      const ClassifierSpec& spec, ModelContext context, TrainingTrace* trace) {
    if (features.empty()) throw TrainError("no training samples");
    if (features.size() != labels.size()) {
        throw TrainError("got " + std::to_string(features.size()) + " feature vectors but " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t C = context.classes.size();
    const std::size_t D = context.tfidf.dim();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (labels[i] >= C) throw TrainError("label " + std::to_string(labels[i]) + " is not a class index");
        if (features[i].dim != D) {
            throw TrainError("feature vector " + std::to_string(i) + " has dimension " +
                             std::to_string(features[i].dim) + ", expected " + std::to_string(D));
        }
        if (!features[i].entries.empty() && features[i].entries.back().index >= D) {
            throw TrainError("feature index out of range in vector " + std::to_string(i));
        }
    }
    std::vector<std::size_t> counts(C, 0);
    for (auto l : labels) ++counts[l];
    const ClassWeights cw = compute_class_weights(counts, spec.balanced());

    ParameterSet params;
    switch (spec.kind()) {
        case ClassifierKind::multinomial_nb:
        case ClassifierKind::complement_nb:
            params = fit_naive_bayes(features, labels, C, D, cw, spec.hp("alpha"),
                                     spec.kind() == ClassifierKind::complement_nb);
            break;
        case ClassifierKind::logreg: params = fit_logreg(features, labels, C, D, cw, spec, trace); break;
        case ClassifierKind::linsvm_ovr: params = fit_svm_ovr(features, labels, C, D, cw, spec); break;
        case ClassifierKind::linsvm_ovo: params = fit_svm_ovo(features, labels, C, D, cw, spec); break;
        case ClassifierKind::mlp: params = fit_mlp(features, labels, C, D, cw, spec, trace); break;
    }
    return ClassifierModel(spec, std::move(context), std::move(params));
}

ClassifierModel train_text_classifier(const LabeledCorpus& corpus, const ClassifierSpec& spec, const PrepConfig& prep,
                                      const VectorizerConfig& vcfg) {
    if (corpus.empty()) throw TrainError("training corpus is empty");
    std::vector<Tokens> tokens;
    tokens.reserve(corpus.size());
    for (const auto& s : corpus.samples()) tokens.push_back(normalize_tokens(s.text, prep));
    TfidfModel tfidf = fit_vectorizer(tokens, vcfg);
    std::vector<FeatureVector> X;
    X.reserve(tokens.size());
    for (const auto& t : tokens) X.push_back(vectorize(tfidf, t));

    ModelContext ctx;
    for (const auto& t : corpus.registry().techniques()) ctx.classes.push_back(t.id);
    ctx.registry_fingerprint = corpus.registry().fingerprint();
    ctx.prep = prep;
    ctx.tfidf = std::move(tfidf);
    ctx.provenance = {{"corpus_fingerprint", corpus.fingerprint()},
                      {"n_samples", corpus.size()},
                      {"registry", corpus.registry().to_json()}};
    return train(X, corpus.labels(), spec, std::move(ctx));
}

namespace {

void check_input(const ClassifierModel& model, const FeatureVector& x) {
    const std::size_t D = model.tfidf().dim();
    if (x.dim != D) {
        throw PredictError("feature vector has dimension " + std::to_string(x.dim) + ", model expects " +
                           std::to_string(D));
    }
    if (!x.entries.empty() && x.entries.back().index >= D) throw PredictError("feature index out of range");
}

}  // namespace

std::vector<double> predict_proba(const ClassifierModel& model, const FeatureVector& x) {
    check_input(model, x);
    switch (model.spec().kind()) {
        case ClassifierKind::multinomial_nb: return naive_bayes_proba(model, x, false);
        case ClassifierKind::complement_nb: return naive_bayes_proba(model, x, true);
        case ClassifierKind::logreg:
        case ClassifierKind::linsvm_ovr: {
            auto s = linear_scores(model, x);
            softmax_inplace(s);
            return s;
        }
        case ClassifierKind::linsvm_ovo: {
            auto t = ovo_tally(model, x);
            softmax_inplace(t.margins, present_mask(model.parameter("present")));
            return t.margins;
        }
        case ClassifierKind::mlp: {
            auto s = mlp_scores(model, x);
            softmax_inplace(s);
            return s;
        }
    }
    throw PredictError("unsupported classifier kind");
}

FeatureVector featurize(const ClassifierModel& model, std::string_view text) {
    return vectorize(model.tfidf(), normalize_tokens(text, model.prep()));
}

std::vector<double> predict_text(const ClassifierModel& model, std::string_view text) {
    return predict_proba(model, featurize(model, text));
}

RankedClasses top_k(const std::vector<double>& probs, std::size_t k) {
    if (k < 1 || k > probs.size()) {
        throw ArgumentError("k must be in [1, " + std::to_string(probs.size()) + "], got " + std::to_string(k));
    }
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    RankedClasses out;
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) out.emplace_back(order[r], probs[order[r]]);
    return out;
}

RankedClasses predict_top_k(const ClassifierModel& model, const FeatureVector& x, std::size_t k) {
    return top_k(predict_proba(model, x), k);
}

std::size_t argmax(const std::vector<double>& probs) {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

std::size_t predict_label(const ClassifierModel& model, const FeatureVector& x) {
    if (model.spec().kind() != ClassifierKind::linsvm_ovo) return argmax(predict_proba(model, x));
    check_input(model, x);
    auto t = ovo_tally(model, x);
    const auto mask = present_mask(model.parameter("present"));
    std::size_t best = model.n_classes();
    for (std::size_t c = 0; c < model.n_classes(); ++c) {
        if (!mask[c]) continue;
        if (best == model.n_classes() || t.votes[c] > t.votes[best] ||
            (t.votes[c] == t.votes[best] && t.margins[c] > t.margins[best])) {
            best = c;
        }
    }
    return best;
}

std::string serialize_model(const ClassifierModel& model) { return model.to_json().dump(1) + "\n"; }

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    write_file(path, serialize_model(model));
}

ClassifierModel parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    return ClassifierModel::from_json(doc);
}

ClassifierModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

TechniqueRegistry registry_of_model(const ClassifierModel& model) {
    if (const auto it = model.provenance().find("registry"); it != model.provenance().end()) {
        try {
            auto reg = TechniqueRegistry::from_json(*it);
            if (reg.fingerprint() == model.registry_fingerprint()) return reg;
        } catch (const Error&) {
        }
    }
    std::vector<TechniqueRef> refs;
    for (const auto& id : model.classes()) refs.push_back({id, "", {}});
    return TechniqueRegistry(std::move(refs));
}

}  // namespace attackmap
