#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprice {

// %.17g round-trips doubles and keeps re-runs byte-identical.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    // version line, e.g. "# fedprice-csv v1 fig1"
    explicit CsvWriter(std::string version_line) { lines_.push_back(std::move(version_line)); }

    void comment(const std::string& text) { lines_.push_back("# " + text); }
    void header(const std::string& columns) { lines_.push_back(columns); }
    void row(const std::string& line) { lines_.push_back(line); }

    std::string content() const {
        std::string out;
        for (const auto& l : lines_) {
            out += l;
            out += '\n';
        }
        return out;
    }

    // temp file + rename so partial output is never observed
    void write_atomic(const std::string& path) const {
        const std::string tmp = path + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("csv: cannot open " + tmp + " for writing");
            f << content();
            if (!f) throw std::runtime_error("csv: write failed for " + tmp);
        }
        if (std::rename(tmp.c_str(), path.c_str()) != 0)
            throw std::runtime_error("csv: rename to " + path + " failed");
    }

  private:
    std::vector<std::string> lines_;
};

}  // namespace fedprice
