#include "mvt/features.hpp"

#include <algorithm>

#include "mvt/errors.hpp"

namespace mvt {
namespace {

constexpr std::uint64_t kMaxParameters = std::uint64_t{1} << 32;

void check_kind(ModelKind kind, const TemplateSpec& spec) {
    spec.validate();
    if (kind.family == ModelFamily::Mvt2c && spec.context_dims() < 1) {
        throw ValidationError("MVT2c requires at least one context dimension");
    }
    if (kind.family == ModelFamily::DMabs) {
        if (kind.widget < 0) {
            throw ValidationError("D-MABs ensemble is parameterized by widget; "
                                  "use the per-widget kind");
        }
        if (kind.widget >= spec.widget_count()) {
            throw ValidationError("D-MABs widget index out of range");
        }
    }
}

std::uint64_t count_parameters(ModelKind kind, const TemplateSpec& spec) {
    const int d = spec.widget_count();
    const auto& n = spec.variations;
    std::uint64_t m = 0;
    switch (kind.family) {
        case ModelFamily::NdMab:
            return spec.layout_count();
        case ModelFamily::DMabs:
            return 1 + static_cast<std::uint64_t>(n[kind.widget]);
        default:
            break;
    }
    m = 1;  // bias
    for (int i = 0; i < d; ++i) m += static_cast<std::uint64_t>(n[i]);
    if (kind.family == ModelFamily::Mvt1) return m;
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k)
            m += static_cast<std::uint64_t>(n[j]) * n[k];
    if (kind.family == ModelFamily::Mvt3) {
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                for (int t = k + 1; t < d; ++t) {
                    m += static_cast<std::uint64_t>(n[j]) * n[k] * n[t];
                    if (m > kMaxParameters) return m;
                }
    }
    if (kind.family == ModelFamily::Mvt2c) {
        for (int g : spec.context_cardinalities) m += static_cast<std::uint64_t>(g);
        for (int i = 0; i < d; ++i)
            for (int g : spec.context_cardinalities)
                m += static_cast<std::uint64_t>(n[i]) * g;
    }
    return m;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind.family) {
        case ModelFamily::Mvt1: return "mvt1";
        case ModelFamily::Mvt2: return "mvt2";
        case ModelFamily::Mvt2c: return "mvt2c";
        case ModelFamily::Mvt3: return "mvt3";
        case ModelFamily::NdMab: return "ndmab";
        case ModelFamily::DMabs:
            return kind.widget < 0 ? "dmabs" : "dmab" + std::to_string(kind.widget);
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(const std::string& name) {
    if (name == "mvt1") return ModelKind::mvt1();
    if (name == "mvt2") return ModelKind::mvt2();
    if (name == "mvt2c") return ModelKind::mvt2c();
    if (name == "mvt3") return ModelKind::mvt3();
    if (name == "ndmab") return ModelKind::nd_mab();
    if (name == "dmabs") return ModelKind::dmabs();
    return std::nullopt;
}

FeatureVector::FeatureVector(std::vector<std::uint32_t> active, std::uint32_t dimension)
    : active_(std::move(active)), dimension_(dimension) {
    std::sort(active_.begin(), active_.end());
    if (std::adjacent_find(active_.begin(), active_.end()) != active_.end()) {
        throw ValidationError("duplicate active feature index");
    }
    if (!active_.empty() && active_.back() >= dimension_) {
        throw ValidationError("active feature index out of range");
    }
}

FeatureIndexer::FeatureIndexer(ModelKind kind, const TemplateSpec& spec)
    : kind_(kind), spec_(&spec) {
    check_kind(kind, spec);
    const std::uint64_t m = count_parameters(kind, spec);
    if (m > kMaxParameters) {
        throw ValidationError("parameter count exceeds 2^32; configuration rejected");
    }
    dimension_ = static_cast<std::uint32_t>(m);

    if (kind.family == ModelFamily::NdMab || kind.family == ModelFamily::DMabs) {
        return;  // no offset tables needed
    }

    const int d = spec.widget_count();
    const auto& n = spec.variations;
    has_pairwise_ = kind.family != ModelFamily::Mvt1;
    has_third_ = kind.family == ModelFamily::Mvt3;
    has_context_ = kind.family == ModelFamily::Mvt2c;

    std::uint32_t next = 1;
    first_offset_.resize(d);
    for (int i = 0; i < d; ++i) {
        first_offset_[i] = next;
        next += static_cast<std::uint32_t>(n[i]);
    }
    if (has_pairwise_) {
        pair_offset_.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                pair_offset_.push_back(next);
                next += static_cast<std::uint32_t>(n[j] * n[k]);
            }
    }
    if (has_third_) {
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                for (int t = k + 1; t < d; ++t) {
                    triple_offset_.push_back(next);
                    next += static_cast<std::uint32_t>(n[j] * n[k] * n[t]);
                }
    }
    if (has_context_) {
        const int l = spec.context_dims();
        context_offset_.resize(l);
        for (int dim = 0; dim < l; ++dim) {
            context_offset_[dim] = next;
            next += static_cast<std::uint32_t>(spec.context_cardinalities[dim]);
        }
        content_context_offset_.resize(static_cast<std::size_t>(d) * l);
        for (int i = 0; i < d; ++i)
            for (int dim = 0; dim < l; ++dim) {
                content_context_offset_[i * l + dim] = next;
                next += static_cast<std::uint32_t>(n[i] * spec.context_cardinalities[dim]);
            }
    }
}

std::uint32_t FeatureIndexer::third_order(int j, int a, int k, int b, int m, int c) const {
    // Rank of (j,k,m), j<k<m, in lexicographic order; blocks are irregular for
    // heterogeneous N so we keep explicit offsets.
    const int d = spec_->widget_count();
    std::uint32_t slot = 0;
    for (int jj = 0; jj < j; ++jj) {
        const int rem = d - jj - 1;
        slot += static_cast<std::uint32_t>(rem * (rem - 1) / 2);
    }
    const int rem_after_j = d - j - 1;
    slot += static_cast<std::uint32_t>(rem_after_j * (rem_after_j - 1) / 2 -
                                       (d - k) * (d - k - 1) / 2);
    slot += static_cast<std::uint32_t>(m - k - 1);
    const auto& n = spec_->variations;
    return triple_offset_[slot] +
           static_cast<std::uint32_t>(((a - 1) * n[k] + (b - 1)) * n[m] + (c - 1));
}

std::uint32_t FeatureIndexer::index_of(const WeightDescriptor& desc) const {
    const auto& spec = *spec_;
    const auto bad = [](const char* what) -> std::uint32_t {
        throw ValidationError(std::string("descriptor invalid for model kind: ") + what);
    };
    switch (kind_.family) {
        case ModelFamily::NdMab: {
            const auto* lid = std::get_if<weight::LayoutId>(&desc);
            if (!lid) return bad("ndmab carries layout-id weights only");
            if (lid->id >= dimension_) return bad("layout id out of range");
            return lid->id;
        }
        case ModelFamily::DMabs: {
            if (std::holds_alternative<weight::Bias>(desc)) return 0;
            const auto* fo = std::get_if<weight::FirstOrder>(&desc);
            if (!fo) return bad("dmab carries bias and first-order weights only");
            if (fo->widget != kind_.widget) return bad("wrong widget for dmab model");
            if (fo->content < 1 || fo->content > spec.variations[fo->widget])
                return bad("content out of range");
            return 1 + static_cast<std::uint32_t>(fo->content - 1);
        }
        default:
            break;
    }
    return std::visit(
        [&](const auto& w) -> std::uint32_t {
            using T = std::decay_t<decltype(w)>;
            const int d = spec.widget_count();
            if constexpr (std::is_same_v<T, weight::Bias>) {
                return 0;
            } else if constexpr (std::is_same_v<T, weight::FirstOrder>) {
                if (w.widget < 0 || w.widget >= d) return bad("widget out of range");
                if (w.content < 1 || w.content > spec.variations[w.widget])
                    return bad("content out of range");
                return first_order(w.widget, w.content);
            } else if constexpr (std::is_same_v<T, weight::Pairwise>) {
                if (!has_pairwise_) return bad("model has no pairwise weights");
                if (w.widget_j < 0 || w.widget_k >= d || w.widget_j >= w.widget_k)
                    return bad("pairwise widgets must be ordered and in range");
                if (w.content_a < 1 || w.content_a > spec.variations[w.widget_j] ||
                    w.content_b < 1 || w.content_b > spec.variations[w.widget_k])
                    return bad("content out of range");
                return pairwise(w.widget_j, w.content_a, w.widget_k, w.content_b);
            } else if constexpr (std::is_same_v<T, weight::ThirdOrder>) {
                if (!has_third_) return bad("model has no third-order weights");
                if (w.widget_j < 0 || w.widget_m >= d || w.widget_j >= w.widget_k ||
                    w.widget_k >= w.widget_m)
                    return bad("third-order widgets must be strictly increasing");
                if (w.content_a < 1 || w.content_a > spec.variations[w.widget_j] ||
                    w.content_b < 1 || w.content_b > spec.variations[w.widget_k] ||
                    w.content_c < 1 || w.content_c > spec.variations[w.widget_m])
                    return bad("content out of range");
                return third_order(w.widget_j, w.content_a, w.widget_k, w.content_b,
                                   w.widget_m, w.content_c);
            } else if constexpr (std::is_same_v<T, weight::ContextMain>) {
                if (!has_context_) return bad("model has no context weights");
                if (w.dim < 0 || w.dim >= spec.context_dims()) return bad("dim out of range");
                if (w.value < 1 || w.value > spec.context_cardinalities[w.dim])
                    return bad("context value out of range");
                return context_main(w.dim, w.value);
            } else if constexpr (std::is_same_v<T, weight::ContentContext>) {
                if (!has_context_) return bad("model has no content-context weights");
                if (w.widget < 0 || w.widget >= d) return bad("widget out of range");
                if (w.dim < 0 || w.dim >= spec.context_dims()) return bad("dim out of range");
                if (w.content < 1 || w.content > spec.variations[w.widget] ||
                    w.value < 1 || w.value > spec.context_cardinalities[w.dim])
                    return bad("content or value out of range");
                return content_context(w.widget, w.content, w.dim, w.value);
            } else {
                return bad("layout-id weights exist only in ndmab");
            }
        },
        desc);
}

WeightDescriptor FeatureIndexer::descriptor_of(std::uint32_t index) const {
    if (index >= dimension_) {
        throw ValidationError("weight index out of range");
    }
    const auto& spec = *spec_;
    const auto& n = spec.variations;
    const int d = spec.widget_count();

    if (kind_.family == ModelFamily::NdMab) return weight::LayoutId{index};
    if (kind_.family == ModelFamily::DMabs) {
        if (index == 0) return weight::Bias{};
        return weight::FirstOrder{kind_.widget, static_cast<int>(index)};
    }
    if (index == 0) return weight::Bias{};

    // Walk the groups in canonical order; each block covers a contiguous range.
    for (int i = d - 1; i >= 0; --i) {
        if (index >= first_offset_[i]) {
            if (index < first_offset_[i] + static_cast<std::uint32_t>(n[i])) {
                return weight::FirstOrder{i, static_cast<int>(index - first_offset_[i]) + 1};
            }
            break;
        }
    }
    if (has_pairwise_) {
        std::size_t slot = 0;
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k, ++slot) {
                const std::uint32_t start = pair_offset_[slot];
                if (index < start + static_cast<std::uint32_t>(n[j] * n[k])) {
                    const std::uint32_t within = index - start;
                    return weight::Pairwise{j, static_cast<int>(within / n[k]) + 1, k,
                                            static_cast<int>(within % n[k]) + 1};
                }
            }
    }
    if (has_third_) {
        std::size_t slot = 0;
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                for (int t = k + 1; t < d; ++t, ++slot) {
                    const std::uint32_t start = triple_offset_[slot];
                    if (index < start + static_cast<std::uint32_t>(n[j] * n[k] * n[t])) {
                        std::uint32_t within = index - start;
                        const int c = static_cast<int>(within % n[t]) + 1;
                        within /= static_cast<std::uint32_t>(n[t]);
                        const int b = static_cast<int>(within % n[k]) + 1;
                        const int a = static_cast<int>(within / n[k]) + 1;
                        return weight::ThirdOrder{j, a, k, b, t, c};
                    }
                }
    }
    if (has_context_) {
        const int l = spec.context_dims();
        for (int dim = 0; dim < l; ++dim) {
            const std::uint32_t start = context_offset_[dim];
            const auto len = static_cast<std::uint32_t>(spec.context_cardinalities[dim]);
            if (index < start + len) {
                return weight::ContextMain{dim, static_cast<int>(index - start) + 1};
            }
        }
        for (int i = 0; i < d; ++i)
            for (int dim = 0; dim < l; ++dim) {
                const std::uint32_t start = content_context_offset_[i * l + dim];
                const int g = spec.context_cardinalities[dim];
                if (index < start + static_cast<std::uint32_t>(n[i] * g)) {
                    const std::uint32_t within = index - start;
                    return weight::ContentContext{i, static_cast<int>(within / g) + 1, dim,
                                                  static_cast<int>(within % g) + 1};
                }
            }
    }
    throw ValidationError("weight index does not map to a descriptor");
}

FeatureVector FeatureIndexer::build(const Layout& layout, const Context* context) const {
    validate_layout(*spec_, layout);
    if (kind_.uses_context()) {
        if (!context) throw ValidationError("contextual model requires a context");
        validate_context(*spec_, *context);
    } else if (context) {
        throw ValidationError("non-contextual model must not receive a context");
    }

    const int d = spec_->widget_count();
    std::vector<std::uint32_t> active;

    switch (kind_.family) {
        case ModelFamily::NdMab:
            active.push_back(layout_flat_id(*spec_, layout));
            break;
        case ModelFamily::DMabs:
            active.push_back(0);
            active.push_back(1 + static_cast<std::uint32_t>(layout[kind_.widget] - 1));
            break;
        default: {
            const int l = spec_->context_dims();
            active.reserve(1 + d + (has_pairwise_ ? d * (d - 1) / 2 : 0) +
                           (has_context_ ? l + d * l : 0));
            active.push_back(0);
            for (int i = 0; i < d; ++i) active.push_back(first_order(i, layout[i]));
            if (has_pairwise_) {
                for (int j = 0; j < d; ++j)
                    for (int k = j + 1; k < d; ++k)
                        active.push_back(pairwise(j, layout[j], k, layout[k]));
            }
            if (has_third_) {
                for (int j = 0; j < d; ++j)
                    for (int k = j + 1; k < d; ++k)
                        for (int t = k + 1; t < d; ++t)
                            active.push_back(
                                third_order(j, layout[j], k, layout[k], t, layout[t]));
            }
            if (has_context_) {
                for (int dim = 0; dim < l; ++dim)
                    active.push_back(context_main(dim, (*context)[dim]));
                for (int i = 0; i < d; ++i)
                    for (int dim = 0; dim < l; ++dim)
                        active.push_back(
                            content_context(i, layout[i], dim, (*context)[dim]));
            }
            break;
        }
    }
    // Group-ordered emission is already strictly increasing.
    return FeatureVector(FeatureVector::Unchecked{}, std::move(active), dimension_);
}

std::uint64_t parameter_count(ModelKind kind, const TemplateSpec& spec) {
    check_kind(kind, spec);
    const std::uint64_t m = count_parameters(kind, spec);
    if (m > kMaxParameters) {
        throw ValidationError("parameter count exceeds 2^32; configuration rejected");
    }
    return m;
}

std::uint64_t identifiable_rank(ModelKind kind, const TemplateSpec& spec) {
    check_kind(kind, spec);
    const int d = spec.widget_count();
    const auto& n = spec.variations;
    switch (kind.family) {
        case ModelFamily::NdMab:
            return spec.layout_count();
        case ModelFamily::DMabs:
            return static_cast<std::uint64_t>(n[kind.widget]);
        default:
            break;
    }
    std::uint64_t rank = 1;
    for (int i = 0; i < d; ++i) rank += static_cast<std::uint64_t>(n[i] - 1);
    if (kind.family == ModelFamily::Mvt1) return rank;
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k)
            rank += static_cast<std::uint64_t>(n[j] - 1) * (n[k] - 1);
    if (kind.family == ModelFamily::Mvt3) {
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                for (int t = k + 1; t < d; ++t)
                    rank += static_cast<std::uint64_t>(n[j] - 1) * (n[k] - 1) * (n[t] - 1);
    }
    if (kind.family == ModelFamily::Mvt2c) {
        for (int g : spec.context_cardinalities)
            rank += static_cast<std::uint64_t>(g - 1);
        for (int i = 0; i < d; ++i)
            for (int g : spec.context_cardinalities)
                rank += static_cast<std::uint64_t>(n[i] - 1) * (g - 1);
    }
    return rank;
}

FeatureVector build_features(ModelKind kind, const TemplateSpec& spec,
                             const Layout& layout, const Context* context) {
    return FeatureIndexer(kind, spec).build(layout, context);
}

std::uint32_t index_of(const WeightDescriptor& desc, ModelKind kind,
                       const TemplateSpec& spec) {
    return FeatureIndexer(kind, spec).index_of(desc);
}

WeightDescriptor descriptor_of(std::uint32_t index, ModelKind kind,
                               const TemplateSpec& spec) {
    return FeatureIndexer(kind, spec).descriptor_of(index);
}

}  // namespace mvt
