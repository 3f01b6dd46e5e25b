// Fixed-format text helpers. Trace CSVs use 17 significant digits so doubles
// round-trip; dB tables use 2 decimals. Output must be byte-identical across
// runs, so everything funnels through these.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace modadc {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_f2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        path_ = path;
    }
    void raw_line(const std::string& line) { out_ << line << '\n'; }
    ~CsvWriter() {
        out_.flush();
    }

  private:
    std::ofstream out_;
    std::string path_;
};

}  // namespace modadc
