#include "mvt/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "mvt/errors.hpp"

namespace mvt {
namespace {

constexpr char kMagic[8] = {'M', 'V', 'T', 'S', 'N', 'A', 'P', '\0'};
constexpr std::uint32_t kVersion = 1;

// Accumulates bytes written/read so the checksum covers the whole payload.
class Hasher {
public:
    void feed(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <typename T>
    void pod(const T& value) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
        hasher_.feed(&value, sizeof(T));
    }
    void doubles(std::span<const double> values) {
        out_.write(reinterpret_cast<const char*>(values.data()),
                   static_cast<std::streamsize>(values.size() * sizeof(double)));
        hasher_.feed(values.data(), values.size() * sizeof(double));
    }
    std::uint64_t checksum() const { return hasher_.value(); }

private:
    std::ostream& out_;
    Hasher hasher_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <typename T>
    T pod() {
        T value;
        in_.read(reinterpret_cast<char*>(&value), sizeof(T));
        if (!in_) throw SnapshotError(SnapshotError::Kind::Corrupt, "truncated snapshot");
        hasher_.feed(&value, sizeof(T));
        return value;
    }
    std::vector<double> doubles(std::size_t count) {
        std::vector<double> values(count);
        in_.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(count * sizeof(double)));
        if (!in_) throw SnapshotError(SnapshotError::Kind::Corrupt, "truncated snapshot");
        hasher_.feed(values.data(), count * sizeof(double));
        return values;
    }
    std::uint64_t checksum() const { return hasher_.value(); }

private:
    std::istream& in_;
    Hasher hasher_;
};

std::uint32_t sane_count(std::uint64_t n, const char* what) {
    if (n > (std::uint64_t{1} << 32)) {
        throw SnapshotError(SnapshotError::Kind::Corrupt,
                            std::string("implausible count in snapshot: ") + what);
    }
    return static_cast<std::uint32_t>(n);
}

}  // namespace

void write_snapshot(const ModelSnapshot& snapshot, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    Writer w(out);
    w.pod(kVersion);
    w.pod(static_cast<std::uint32_t>(snapshot.spec.variations.size()));
    for (int n : snapshot.spec.variations) w.pod(static_cast<std::uint32_t>(n));
    w.pod(static_cast<std::uint32_t>(snapshot.spec.context_cardinalities.size()));
    for (int g : snapshot.spec.context_cardinalities) w.pod(static_cast<std::uint32_t>(g));
    w.pod(static_cast<std::uint8_t>(snapshot.kind.family));
    w.pod(static_cast<std::int32_t>(snapshot.kind.widget));
    w.pod(static_cast<std::uint32_t>(snapshot.posteriors.size()));
    for (const GaussianPosterior& p : snapshot.posteriors) {
        w.pod(static_cast<std::uint64_t>(p.dimension()));
        w.doubles(p.means());
        w.doubles(p.variances());
    }
    const std::uint64_t checksum = w.checksum();
    out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    if (!out) throw SnapshotError(SnapshotError::Kind::Io, "snapshot write failed");
}

ModelSnapshot read_snapshot(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw SnapshotError(SnapshotError::Kind::Corrupt, "bad snapshot magic");
    }
    Reader r(in);
    const auto version = r.pod<std::uint32_t>();
    if (version != kVersion) {
        throw SnapshotError(SnapshotError::Kind::VersionMismatch,
                            "unsupported snapshot version " + std::to_string(version));
    }
    ModelSnapshot snapshot;
    const auto d = r.pod<std::uint32_t>();
    snapshot.spec.variations.resize(sane_count(d, "widgets"));
    for (auto& n : snapshot.spec.variations) n = static_cast<int>(r.pod<std::uint32_t>());
    const auto l = r.pod<std::uint32_t>();
    snapshot.spec.context_cardinalities.resize(sane_count(l, "context"));
    for (auto& g : snapshot.spec.context_cardinalities)
        g = static_cast<int>(r.pod<std::uint32_t>());
    snapshot.kind.family = static_cast<ModelFamily>(r.pod<std::uint8_t>());
    snapshot.kind.widget = static_cast<int>(r.pod<std::int32_t>());
    const auto models = r.pod<std::uint32_t>();
    snapshot.posteriors.reserve(sane_count(models, "models"));
    for (std::uint32_t i = 0; i < models; ++i) {
        const auto m = sane_count(r.pod<std::uint64_t>(), "weights");
        std::vector<double> means = r.doubles(m);
        std::vector<double> variances = r.doubles(m);
        snapshot.posteriors.emplace_back(std::move(means), std::move(variances));
    }
    const std::uint64_t expected = r.checksum();
    std::uint64_t stored = 0;
    in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
    if (!in || stored != expected) {
        throw SnapshotError(SnapshotError::Kind::Corrupt, "snapshot checksum mismatch");
    }
    return snapshot;
}

void save_snapshot(const ModelSnapshot& snapshot, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + path);
    write_snapshot(snapshot, out);
}

ModelSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + path);
    return read_snapshot(in);
}

}  // namespace mvt
