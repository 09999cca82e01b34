#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace buildflex::csv {

struct Row {
    std::size_t line_number = 0;  // 1-based, includes header/comment lines
    std::vector<std::string> fields;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    // Index of a header column; throws parse error listing the header if absent.
    std::size_t column(const std::string& name) const;
};

// Reads a comma-separated file. Lines starting with '#' are skipped (report
// files carry a '# ...' schema header). No quoting: none of the formats
// defined here need it.
Table read_file(const std::string& path);

class Writer {
  public:
    explicit Writer(const std::string& path);

    void comment(const std::string& text);
    void row(const std::vector<std::string>& fields);
    void close();

  private:
    std::ofstream out_;
    std::string path_;
};

}  // namespace buildflex::csv
