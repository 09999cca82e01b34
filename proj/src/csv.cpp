#include "csv.hpp"

#include <sstream>

#include "common.hpp"

namespace buildflex::csv {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    std::string have;
    for (const auto& h : header) {
        if (!have.empty()) have += ",";
        have += h;
    }
    fail(ErrorKind::parse, "missing column '" + name + "' (header: " + have + ")");
}

static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
    Table table;
    std::string line;
    std::size_t line_number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            fail(ErrorKind::parse, path + ":" + std::to_string(line_number) + ": expected " +
                                       std::to_string(table.header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
        }
        table.rows.push_back(Row{line_number, std::move(fields)});
    }
    if (!have_header) fail(ErrorKind::parse, path + ": empty file");
    return table;
}

Writer::Writer(const std::string& path) : out_(path), path_(path) {
    if (!out_) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
}

void Writer::comment(const std::string& text) {
    out_ << "# " << text << "\n";
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

void Writer::close() {
    out_.close();
    if (!out_) fail(ErrorKind::io, "failed writing '" + path_ + "'");
}

}  // namespace buildflex::csv
