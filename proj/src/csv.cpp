#include "mvt/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>

#include "mvt/errors.hpp"

namespace mvt {

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::string& header)
    : path_(path), temp_path_(path + ".tmp") {
    out_.open(temp_path_, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + temp_path_);
    }
    out_ << "# schema: " << schema << "\n" << header << "\n";
}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(temp_path_, ec);
    }
}

void CsvWriter::row(const std::string& line) { out_ << line << "\n"; }

void CsvWriter::close() {
    out_.flush();
    if (!out_) {
        throw SnapshotError(SnapshotError::Kind::Io, "write failed: " + temp_path_);
    }
    out_.close();
    std::error_code ec;
    std::filesystem::rename(temp_path_, path_, ec);
    if (ec) {
        throw SnapshotError(SnapshotError::Kind::Io,
                            "cannot rename " + temp_path_ + " to " + path_);
    }
    closed_ = true;
}

std::string format_double(double value) {
    // Shortest representation that round-trips; keeps reruns byte-identical.
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

}  // namespace mvt
