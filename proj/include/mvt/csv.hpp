#pragma once

#include <fstream>
#include <string>

namespace mvt {

// CSV emitter with a schema-version comment line and a header row. Writes to
// a temp file and renames on close so readers never see partial output.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema,
              const std::string& header);
    ~CsvWriter();

    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::string& line);
    // Commits the temp file to its final path. Throws on I/O failure.
    void close();

private:
    std::string path_;
    std::string temp_path_;
    std::ofstream out_;
    bool closed_ = false;
};

std::string format_double(double value);

}  // namespace mvt
