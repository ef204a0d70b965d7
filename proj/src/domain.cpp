#include "mvt/domain.hpp"

#include <string>

#include "mvt/errors.hpp"

namespace mvt {
namespace {

std::uint64_t checked_product(const std::vector<int>& values) {
    std::uint64_t product = 1;
    for (int v : values) {
        product *= static_cast<std::uint64_t>(v);
        if (product > (std::uint64_t{1} << 32)) {
            return std::uint64_t{1} << 33;  // sentinel: past the cap
        }
    }
    return product;
}

}  // namespace

std::uint64_t TemplateSpec::layout_count() const {
    return checked_product(variations);
}

std::uint64_t TemplateSpec::context_count() const {
    return checked_product(context_cardinalities);
}

void TemplateSpec::validate() const {
    if (variations.empty()) {
        throw ValidationError("template must have at least one widget");
    }
    for (std::size_t i = 0; i < variations.size(); ++i) {
        if (variations[i] < 1) {
            throw ValidationError("widget must have at least one variation",
                                  "widgets[" + std::to_string(i) + "]");
        }
    }
    for (std::size_t l = 0; l < context_cardinalities.size(); ++l) {
        if (context_cardinalities[l] < 1) {
            throw ValidationError("context dimension must have at least one value",
                                  "context[" + std::to_string(l) + "]");
        }
    }
    if (layout_count() > (std::uint64_t{1} << 32)) {
        throw ValidationError("layout count exceeds 2^32; configuration rejected");
    }
}

void validate_layout(const TemplateSpec& spec, const Layout& layout) {
    if (static_cast<int>(layout.size()) != spec.widget_count()) {
        throw ValidationError("layout length does not match widget count");
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i] < 1 || layout[i] > spec.variations[i]) {
            throw ValidationError("content id out of range",
                                  "layout[" + std::to_string(i) + "]");
        }
    }
}

void validate_context(const TemplateSpec& spec, const Context& context) {
    if (static_cast<int>(context.size()) != spec.context_dims()) {
        throw ValidationError("context length does not match context dimensions");
    }
    for (std::size_t l = 0; l < context.size(); ++l) {
        if (context[l] < 1 || context[l] > spec.context_cardinalities[l]) {
            throw ValidationError("context value out of range",
                                  "context[" + std::to_string(l) + "]");
        }
    }
}

std::uint32_t layout_flat_id(const TemplateSpec& spec, const Layout& layout) {
    std::uint64_t id = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        id = id * static_cast<std::uint64_t>(spec.variations[i]) +
             static_cast<std::uint64_t>(layout[i] - 1);
    }
    return static_cast<std::uint32_t>(id);
}

Layout layout_from_flat_id(const TemplateSpec& spec, std::uint32_t id) {
    Layout layout(spec.widget_count());
    std::uint64_t rest = id;
    for (int i = spec.widget_count() - 1; i >= 0; --i) {
        const auto n = static_cast<std::uint64_t>(spec.variations[i]);
        layout[i] = static_cast<int>(rest % n) + 1;
        rest /= n;
    }
    return layout;
}

std::uint32_t context_flat_id(const TemplateSpec& spec, const Context& context) {
    std::uint64_t id = 0;
    for (std::size_t l = 0; l < context.size(); ++l) {
        id = id * static_cast<std::uint64_t>(spec.context_cardinalities[l]) +
             static_cast<std::uint64_t>(context[l] - 1);
    }
    return static_cast<std::uint32_t>(id);
}

Context context_from_flat_id(const TemplateSpec& spec, std::uint32_t id) {
    Context context(spec.context_dims());
    std::uint64_t rest = id;
    for (int l = spec.context_dims() - 1; l >= 0; --l) {
        const auto g = static_cast<std::uint64_t>(spec.context_cardinalities[l]);
        context[l] = static_cast<int>(rest % g) + 1;
        rest /= g;
    }
    return context;
}

LayoutEnumerator::LayoutEnumerator(const TemplateSpec& spec)
    : spec_(&spec), current_(spec.widget_count(), 1), done_(spec.variations.empty()) {}

void LayoutEnumerator::next() {
    if (done_) return;
    for (int i = static_cast<int>(current_.size()) - 1; i >= 0; --i) {
        if (current_[i] < spec_->variations[i]) {
            ++current_[i];
            return;
        }
        current_[i] = 1;
    }
    done_ = true;
}

namespace detail {

void check_enumeration_cap(const TemplateSpec& spec, std::uint64_t cap) {
    if (spec.layout_count() > cap) {
        throw CapExceededError(
            "layout space too large to enumerate (" +
            std::to_string(spec.layout_count()) + " > cap " + std::to_string(cap) +
            "); use hill climbing instead");
    }
}

}  // namespace detail
}  // namespace mvt
