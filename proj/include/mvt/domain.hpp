#pragma once

#include <cstdint>
#include <vector>

namespace mvt {

// A page template: D widgets with N_i content alternatives each, plus L
// categorical context dimensions with G_l values each. Contents and context
// values are 1-based identifiers.
struct TemplateSpec {
    std::vector<int> variations;             // N_1..N_D
    std::vector<int> context_cardinalities;  // G_1..G_L

    int widget_count() const { return static_cast<int>(variations.size()); }
    int context_dims() const { return static_cast<int>(context_cardinalities.size()); }

    // Product of all N_i. Validated to fit 32 bits.
    std::uint64_t layout_count() const;
    // Product of all G_l (1 when L = 0).
    std::uint64_t context_count() const;

    // Throws ValidationError unless D >= 1, every N_i >= 1, every G_l >= 1
    // and layout_count() <= 2^32.
    void validate() const;

    bool operator==(const TemplateSpec&) const = default;
};

// One content choice per widget; entry i in {1..N_i}.
using Layout = std::vector<int>;

// One value per context dimension; entry l in {1..G_l}.
using Context = std::vector<int>;

// Throw ValidationError if the layout/context is malformed for the spec.
void validate_layout(const TemplateSpec& spec, const Layout& layout);
void validate_context(const TemplateSpec& spec, const Context& context);

// Flat layout index in [0, layout_count), matching lexicographic enumeration
// order (last widget varies fastest).
std::uint32_t layout_flat_id(const TemplateSpec& spec, const Layout& layout);
Layout layout_from_flat_id(const TemplateSpec& spec, std::uint32_t id);

std::uint32_t context_flat_id(const TemplateSpec& spec, const Context& context);
Context context_from_flat_id(const TemplateSpec& spec, std::uint32_t id);

// Iterates every layout exactly once in lexicographic order.
//
//   for (LayoutEnumerator it(spec); !it.done(); it.next()) { ... it.layout() ... }
class LayoutEnumerator {
public:
    explicit LayoutEnumerator(const TemplateSpec& spec);

    bool done() const { return done_; }
    void next();
    const Layout& layout() const { return current_; }

private:
    const TemplateSpec* spec_;
    Layout current_;
    bool done_;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1000000;

// Calls fn(layout) for each layout in lexicographic order. Throws
// CapExceededError (with a hint to use hill climbing) when the layout count
// exceeds `cap`.
template <typename Fn>
void enumerate_layouts(const TemplateSpec& spec, Fn&& fn,
                       std::uint64_t cap = kDefaultEnumerationCap);

namespace detail {
void check_enumeration_cap(const TemplateSpec& spec, std::uint64_t cap);
}

template <typename Fn>
void enumerate_layouts(const TemplateSpec& spec, Fn&& fn, std::uint64_t cap) {
    detail::check_enumeration_cap(spec, cap);
    for (LayoutEnumerator it(spec); !it.done(); it.next()) {
        fn(it.layout());
    }
}

}  // namespace mvt
