#pragma once

/*
 * Provider interfaces: the policy model that writes reasoning steps, the
 * joint text/image embedder, the problem-complexity estimator and the
 * optional outcome reward model.
 *
 * Implementations must tolerate concurrent calls on a shared const handle.
 * No call may depend on state left behind by an earlier call.
 */

#include "thoughtcards/core.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thoughtcards {

struct GenerationParams {
    double temperature = 0.7;
    int max_tokens = 512;
    std::optional<std::uint64_t> seed;

    void validate() const {
        if (!(temperature >= 0.0)) throw UsageError("temperature must be >= 0");
        if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
    }
};

// ============================================================================
// Embedding
// ============================================================================

inline constexpr double kUnitNormTolerance = 1e-6;

/// A unit-norm vector. The only ways to build one check or enforce the norm.
class Embedding {
public:
    Embedding() = default;

    /// Scales `raw` to unit length; the zero vector is rejected.
    static Embedding normalize(std::vector<double> raw) {
        double sq = 0.0;
        for (double v : raw) sq += v * v;
        const double norm = std::sqrt(sq);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateEmbedding("cannot normalize a zero or non-finite vector");
        for (double& v : raw) v /= norm;
        Embedding e;
        e.values_ = std::move(raw);
        return e;
    }

    /// Adopts `values` as-is after checking the norm is 1 within tolerance.
    static Embedding from_unit(std::vector<double> values, double tolerance = kUnitNormTolerance) {
        double sq = 0.0;
        for (double v : values) sq += v * v;
        if (values.empty() || !(std::abs(std::sqrt(sq) - 1.0) <= tolerance)) {
            throw DegenerateEmbedding("embedding is not unit-norm");
        }
        Embedding e;
        e.values_ = std::move(values);
        return e;
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t dimension() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double dot(const Embedding& other) const {
        if (other.dimension() != dimension()) {
            throw DimensionMismatch("embedding dimensions differ: " + std::to_string(dimension()) + " vs " +
                                    std::to_string(other.dimension()));
        }
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
        return s;
    }

    double norm() const noexcept {
        double sq = 0.0;
        for (double v : values_) sq += v * v;
        return std::sqrt(sq);
    }

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<double> values_;
};

/// Element-wise mean of equal-dimension embeddings, re-normalized.
inline Embedding mean_embedding(std::span<const Embedding> items) {
    if (items.empty()) throw UsageError("mean of zero embeddings");
    const std::size_t dim = items.front().dimension();
    std::vector<double> sum(dim, 0.0);
    for (const auto& e : items) {
        if (e.dimension() != dim) throw DimensionMismatch("cannot average embeddings of different dimension");
        auto v = e.values();
        for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
    }
    const double n = static_cast<double>(items.size());
    for (double& v : sum) v /= n;
    return Embedding::normalize(std::move(sum));
}

/// (image + text) / 2, renormalized.
inline Embedding joint_embedding(const Embedding& image, const Embedding& text) {
    const Embedding pair[] = {image, text};
    return mean_embedding(pair);
}

// ============================================================================
// Interfaces
// ============================================================================

class PolicyModel {
public:
    virtual ~PolicyModel() = default;

    /// Next step for `action`, conditioned on the query and the steps taken so far.
    virtual ReasoningStep generate_step(const Query& query, std::span<const ReasoningStep> history,
                                        Action action, const GenerationParams& params) const = 0;

    /// A chain-of-thought step whose prompt demands a final answer.
    virtual ReasoningStep force_answer(const Query& query, std::span<const ReasoningStep> history,
                                       const GenerationParams& params) const = 0;

    /// One independently sampled direct answer, already normalized. Used for
    /// self-consistency voting; `sample_index` distinguishes the samples.
    virtual std::string sample_answer(const Query& query, int sample_index, const GenerationParams& params) const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;

    virtual Embedding embed_text(std::string_view text) const = 0;
    virtual Embedding embed_image(const ImagePayload& image) const = 0;
};

/// Text-image semantics of a query: the joint embedding, or the text
/// embedding alone when there is no image.
inline Embedding joint_embedding(const Embedder& embedder, const std::optional<ImagePayload>& image,
                                 std::string_view text) {
    if (text.empty()) throw UsageError("joint embedding needs non-empty text");
    Embedding t = embedder.embed_text(text);
    if (!image) return t;
    Embedding i = embedder.embed_image(*image);
    if (i.dimension() != t.dimension()) throw DimensionMismatch("image and text embeddings differ in dimension");
    return joint_embedding(i, t);
}

class ComplexityEstimator {
public:
    virtual ~ComplexityEstimator() = default;
    virtual double estimate_complexity(const Query& query) const = 0;
};

class OutcomeScorer {
public:
    virtual ~OutcomeScorer() = default;
    /// Score in [0, 1].
    virtual double score_outcome(const Query& query, const Trajectory& trajectory) const = 0;
};

/// Non-owning bundle of the providers a pipeline run needs. `orm` may be null.
struct Providers {
    const PolicyModel& policy;
    const Embedder& embedder;
    const ComplexityEstimator& complexity;
    const OutcomeScorer* orm = nullptr;
};

}  // namespace thoughtcards
