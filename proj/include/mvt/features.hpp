#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mvt/domain.hpp"

namespace mvt {

// Model families. Mvt2c is the only contextual family; DMabs is parameterized
// by a widget index (widget < 0 denotes the ensemble of all D per-widget
// models, which is not directly featurizable).
enum class ModelFamily : std::uint8_t { Mvt1, Mvt2, Mvt2c, Mvt3, NdMab, DMabs };

struct ModelKind {
    ModelFamily family = ModelFamily::Mvt2;
    int widget = -1;  // only meaningful for DMabs

    static ModelKind mvt1() { return {ModelFamily::Mvt1, -1}; }
    static ModelKind mvt2() { return {ModelFamily::Mvt2, -1}; }
    static ModelKind mvt2c() { return {ModelFamily::Mvt2c, -1}; }
    static ModelKind mvt3() { return {ModelFamily::Mvt3, -1}; }
    static ModelKind nd_mab() { return {ModelFamily::NdMab, -1}; }
    static ModelKind dmabs() { return {ModelFamily::DMabs, -1}; }
    static ModelKind dmab(int widget) { return {ModelFamily::DMabs, widget}; }

    bool uses_context() const { return family == ModelFamily::Mvt2c; }
    bool is_dmabs_ensemble() const { return family == ModelFamily::DMabs && widget < 0; }

    bool operator==(const ModelKind&) const = default;
};

std::string to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(const std::string& name);

// Weight classes. Widget and context-dimension indices are 0-based positions;
// content and context-value ids are the 1-based identifiers stored in Layout
// and Context.
namespace weight {
struct Bias {
    bool operator==(const Bias&) const = default;
};
struct FirstOrder {
    int widget, content;
    bool operator==(const FirstOrder&) const = default;
};
struct Pairwise {  // widget_j < widget_k
    int widget_j, content_a, widget_k, content_b;
    bool operator==(const Pairwise&) const = default;
};
struct ThirdOrder {  // widgets strictly increasing
    int widget_j, content_a, widget_k, content_b, widget_m, content_c;
    bool operator==(const ThirdOrder&) const = default;
};
struct ContextMain {
    int dim, value;
    bool operator==(const ContextMain&) const = default;
};
struct ContentContext {
    int widget, content, dim, value;
    bool operator==(const ContentContext&) const = default;
};
struct LayoutId {
    std::uint32_t id;
    bool operator==(const LayoutId&) const = default;
};
}  // namespace weight

using WeightDescriptor =
    std::variant<weight::Bias, weight::FirstOrder, weight::Pairwise,
                 weight::ThirdOrder, weight::ContextMain, weight::ContentContext,
                 weight::LayoutId>;

// Sparse binary feature vector: the set of active weight indices, strictly
// increasing, over a weight space of size `dimension`.
class FeatureVector {
public:
    FeatureVector() = default;
    // Sorts and validates (no duplicates, all < dimension).
    FeatureVector(std::vector<std::uint32_t> active, std::uint32_t dimension);

    const std::vector<std::uint32_t>& active() const { return active_; }
    std::uint32_t dimension() const { return dimension_; }
    std::size_t count() const { return active_.size(); }

    bool operator==(const FeatureVector&) const = default;

private:
    friend class FeatureIndexer;
    struct Unchecked {};
    FeatureVector(Unchecked, std::vector<std::uint32_t> active, std::uint32_t dimension)
        : active_(std::move(active)), dimension_(dimension) {}

    std::vector<std::uint32_t> active_;
    std::uint32_t dimension_ = 0;
};

// Deterministic, collision-free weight indexing for one (kind, spec) pair.
//
// Canonical order: bias; first-order by (widget, content); pairwise by
// (j, k, a, b) lexicographic; third-order by (j, k, m, a, b, c); context main
// by (dim, value); content-context by (widget, dim, content, value). NdMab
// uses flat layout ids; DMabs(i) uses bias then widget i's contents.
class FeatureIndexer {
public:
    FeatureIndexer(ModelKind kind, const TemplateSpec& spec);

    ModelKind kind() const { return kind_; }
    const TemplateSpec& spec() const { return *spec_; }
    std::uint32_t dimension() const { return dimension_; }

    // Index accessors for the weight classes present in this model. These do
    // not range-check in release builds; callers pass validated ids.
    std::uint32_t bias() const { return 0; }
    std::uint32_t first_order(int widget, int content) const {
        return first_offset_[widget] + static_cast<std::uint32_t>(content - 1);
    }
    std::uint32_t pairwise(int widget_j, int content_a, int widget_k, int content_b) const {
        const auto& blk = pair_offset_[pair_slot(widget_j, widget_k)];
        return blk + static_cast<std::uint32_t>((content_a - 1) * spec_->variations[widget_k] +
                                                (content_b - 1));
    }
    std::uint32_t third_order(int j, int a, int k, int b, int m, int c) const;
    std::uint32_t context_main(int dim, int value) const {
        return context_offset_[dim] + static_cast<std::uint32_t>(value - 1);
    }
    std::uint32_t content_context(int widget, int content, int dim, int value) const {
        const auto blk = content_context_offset_[widget * spec_->context_dims() + dim];
        return blk + static_cast<std::uint32_t>((content - 1) * spec_->context_cardinalities[dim] +
                                                (value - 1));
    }

    bool has_pairwise() const { return has_pairwise_; }
    bool has_third_order() const { return has_third_; }
    bool has_context() const { return has_context_; }

    // Canonical bijection over [0, dimension).
    std::uint32_t index_of(const WeightDescriptor& desc) const;
    WeightDescriptor descriptor_of(std::uint32_t index) const;

    // Feature construction. `context` must be non-null iff the kind is
    // contextual. Validates the layout/context.
    FeatureVector build(const Layout& layout, const Context* context = nullptr) const;

private:
    std::uint32_t pair_slot(int j, int k) const {
        // Rank of (j, k), j < k, in lexicographic order over D widgets.
        const int d = spec_->widget_count();
        return static_cast<std::uint32_t>(j * (2 * d - j - 1) / 2 + (k - j - 1));
    }

    ModelKind kind_;
    const TemplateSpec* spec_;
    std::uint32_t dimension_ = 0;
    bool has_pairwise_ = false, has_third_ = false, has_context_ = false;
    std::vector<std::uint32_t> first_offset_;            // per widget
    std::vector<std::uint32_t> pair_offset_;             // per (j,k) slot
    std::vector<std::uint32_t> triple_offset_;           // per (j,k,m) slot, lex order
    std::vector<std::uint32_t> context_offset_;          // per context dim
    std::vector<std::uint32_t> content_context_offset_;  // per (widget, dim)
};

// Exact weight count M for the model family, or ValidationError when the kind
// is incompatible with the spec or the count exceeds 2^32.
std::uint64_t parameter_count(ModelKind kind, const TemplateSpec& spec);

// Dimension of the function space the model spans. Smaller than
// parameter_count because indicator blocks are linearly dependent (each
// widget's indicators sum to the bias column): an ANOVA-style count of
// 1 + sum(N_i - 1) + sum (N_j - 1)(N_k - 1) + ... Nested-model tests need
// rank differences, not raw weight-count differences.
std::uint64_t identifiable_rank(ModelKind kind, const TemplateSpec& spec);

FeatureVector build_features(ModelKind kind, const TemplateSpec& spec,
                             const Layout& layout, const Context* context = nullptr);

std::uint32_t index_of(const WeightDescriptor& desc, ModelKind kind,
                       const TemplateSpec& spec);
WeightDescriptor descriptor_of(std::uint32_t index, ModelKind kind,
                               const TemplateSpec& spec);

}  // namespace mvt
