#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvt/blip.hpp"
#include "mvt/features.hpp"

namespace mvt {

// Persistent model state: the template, the model kind, and one posterior per
// model (a single posterior for every kind except the D-MABs ensemble, which
// stores one per widget).
//
// Binary format v1, little-endian:
//   magic "MVTSNAP\0" | u32 version | spec | kind | u32 model count |
//   per model: u64 M, f64 means[M], f64 variances[M] | u64 fnv1a checksum.
// Round-trips are bit-exact.
struct ModelSnapshot {
    TemplateSpec spec;
    ModelKind kind;
    std::vector<GaussianPosterior> posteriors;
};

void save_snapshot(const ModelSnapshot& snapshot, const std::string& path);

// Throws SnapshotError: VersionMismatch for an unsupported version, Corrupt
// for bad magic/checksum/truncation, Io when the file cannot be read.
ModelSnapshot load_snapshot(const std::string& path);

void write_snapshot(const ModelSnapshot& snapshot, std::ostream& out);
ModelSnapshot read_snapshot(std::istream& in);

}  // namespace mvt
