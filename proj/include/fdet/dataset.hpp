#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fdet/errors.hpp"
#include "fdet/signal.hpp"

namespace fdet {

/// How to read a delimited three-phase file. Column names refer to header
/// cells; without a header the fixed order Ia,Ib,Ic,Va,Vb,Vc[,label] applies.
struct DatasetSchema {
    enum class LabelMode { BinaryColumn, FlagColumns, None };

    std::array<std::string, 3> current_columns{"Ia", "Ib", "Ic"};
    std::array<std::string, 3> voltage_columns{"Va", "Vb", "Vc"};
    LabelMode label_mode = LabelMode::BinaryColumn;
    std::string label_column = "fault";
    std::vector<std::string> flag_columns;
    bool has_header = true;
    double sample_interval = 1.0;  // nominal; labels, not timing, drive evaluation

    void validate() const {
        std::vector<std::string_view> names;
        for (const auto& n : current_columns)
            names.emplace_back(n);
        for (const auto& n : voltage_columns)
            names.emplace_back(n);
        if (label_mode == LabelMode::BinaryColumn)
            names.emplace_back(label_column);
        if (label_mode == LabelMode::FlagColumns) {
            if (flag_columns.empty())
                throw SchemaError("fault_flag_columns mode needs at least one flag column");
            if (!has_header)
                throw SchemaError("fault_flag_columns mode requires a header row");
            for (const auto& n : flag_columns)
                names.emplace_back(n);
        }
        for (const auto& n : names)
            if (n.empty())
                throw SchemaError("schema column names must be non-empty");
        for (std::size_t i = 0; i < names.size(); ++i)
            for (std::size_t j = i + 1; j < names.size(); ++j)
                if (names[i] == names[j])
                    throw SchemaError("schema column names must be distinct: '" +
                                      std::string(names[i]) + "'");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s.remove_prefix(1);
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

inline double parse_cell(std::string_view cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("non-numeric value '" + std::string(cell) + "' in row " +
                         std::to_string(row) + " of column " + column);
    return value;
}

}  // namespace detail

inline ThreePhaseSignal load_csv(const std::string& path, const DatasetSchema& schema) {
    schema.validate();
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");

    std::unordered_map<std::string, std::size_t> index;
    std::string line;
    if (schema.has_header) {
        if (!std::getline(is, line))
            throw ParseError("'" + path + "' is empty; expected a header row");
        const auto cells = detail::split_row(line);
        for (std::size_t i = 0; i < cells.size(); ++i)
            index.emplace(std::string(cells[i]), i);
    } else {
        for (std::size_t i = 0; i < 3; ++i) {
            index.emplace(schema.current_columns[i], i);
            index.emplace(schema.voltage_columns[i], i + 3);
        }
        if (schema.label_mode == DatasetSchema::LabelMode::BinaryColumn)
            index.emplace(schema.label_column, 6);
    }

    auto column_of = [&](const std::string& name) {
        const auto it = index.find(name);
        if (it == index.end())
            throw SchemaError("column '" + name + "' not found in '" + path + "'");
        return it->second;
    };
    std::array<std::size_t, 3> cur_idx, vol_idx;
    for (std::size_t i = 0; i < 3; ++i) {
        cur_idx[i] = column_of(schema.current_columns[i]);
        vol_idx[i] = column_of(schema.voltage_columns[i]);
    }
    std::size_t label_idx = 0;
    std::vector<std::size_t> flag_idx;
    if (schema.label_mode == DatasetSchema::LabelMode::BinaryColumn)
        label_idx = column_of(schema.label_column);
    if (schema.label_mode == DatasetSchema::LabelMode::FlagColumns)
        for (const auto& name : schema.flag_columns)
            flag_idx.push_back(column_of(name));

    ThreePhaseSignal sig;
    sig.sample_interval = schema.sample_interval;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (detail::trim(line).empty())
            continue;
        ++row;
        const auto cells = detail::split_row(line);
        auto cell = [&](std::size_t idx, const std::string& name) -> std::string_view {
            if (idx >= cells.size())
                throw ParseError("row " + std::to_string(row) + " has only " +
                                 std::to_string(cells.size()) + " cells; column " + name +
                                 " is missing");
            return cells[idx];
        };
        sig.ia.push_back(detail::parse_cell(cell(cur_idx[0], schema.current_columns[0]), row,
                                            schema.current_columns[0]));
        sig.ib.push_back(detail::parse_cell(cell(cur_idx[1], schema.current_columns[1]), row,
                                            schema.current_columns[1]));
        sig.ic.push_back(detail::parse_cell(cell(cur_idx[2], schema.current_columns[2]), row,
                                            schema.current_columns[2]));
        sig.va.push_back(detail::parse_cell(cell(vol_idx[0], schema.voltage_columns[0]), row,
                                            schema.voltage_columns[0]));
        sig.vb.push_back(detail::parse_cell(cell(vol_idx[1], schema.voltage_columns[1]), row,
                                            schema.voltage_columns[1]));
        sig.vc.push_back(detail::parse_cell(cell(vol_idx[2], schema.voltage_columns[2]), row,
                                            schema.voltage_columns[2]));
        switch (schema.label_mode) {
            case DatasetSchema::LabelMode::BinaryColumn: {
                const double v =
                    detail::parse_cell(cell(label_idx, schema.label_column), row,
                                       schema.label_column);
                sig.fault_mask.push_back(v != 0.0 ? 1 : 0);
                break;
            }
            case DatasetSchema::LabelMode::FlagColumns: {
                std::uint8_t any = 0;
                for (std::size_t f = 0; f < flag_idx.size(); ++f) {
                    const double v = detail::parse_cell(
                        cell(flag_idx[f], schema.flag_columns[f]), row, schema.flag_columns[f]);
                    any |= (v != 0.0 ? 1 : 0);
                }
                sig.fault_mask.push_back(any);
                break;
            }
            case DatasetSchema::LabelMode::None:
                sig.fault_mask.push_back(0);
                break;
        }
    }
    return sig;
}

/// Header `t,Ia,Ib,Ic,Va,Vb,Vc,fault`; time with 9 decimals, channel values
/// in shortest round-trip decimal form.
inline void export_signal_csv(const std::string& path, const ThreePhaseSignal& sig) {
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os << "t,Ia,Ib,Ic,Va,Vb,Vc,fault\n";
    char buf[64];
    auto value = [&](double v) -> std::string_view {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return {buf, static_cast<std::size_t>(ptr - buf)};
    };
    char tbuf[40];
    for (std::size_t i = 0; i < sig.size(); ++i) {
        std::snprintf(tbuf, sizeof(tbuf), "%.9f", static_cast<double>(i) * sig.sample_interval);
        os << tbuf << ',' << value(sig.ia[i]) << ',' << value(sig.ib[i]) << ','
           << value(sig.ic[i]) << ',' << value(sig.va[i]) << ',' << value(sig.vb[i]) << ','
           << value(sig.vc[i]) << ',' << int(sig.fault_mask[i]) << '\n';
    }
    if (!os)
        throw IoError("failed while writing '" + path + "'");
}

struct NormalSplit {
    ThreePhaseSignal train;  // longest contiguous fault-free run
    ThreePhaseSignal test;   // the full input signal
};

/// Cuts the longest fault-free run (first such run on ties) for training.
inline NormalSplit split_normal(const ThreePhaseSignal& signal, std::size_t min_len) {
    std::size_t best_start = 0, best_len = 0;
    std::size_t i = 0;
    const std::size_t n = signal.size();
    while (i < n) {
        if (signal.fault_mask[i] == 0) {
            std::size_t j = i;
            while (j < n && signal.fault_mask[j] == 0)
                ++j;
            if (j - i > best_len) {
                best_len = j - i;
                best_start = i;
            }
            i = j;
        } else {
            ++i;
        }
    }
    if (best_len < min_len)
        throw DataError("no fault-free run of at least " + std::to_string(min_len) +
                        " samples (longest is " + std::to_string(best_len) + ")");

    NormalSplit split;
    split.test = signal;
    split.train.sample_interval = signal.sample_interval;
    auto slice = [&](const std::vector<double>& src) {
        return std::vector<double>(src.begin() + static_cast<std::ptrdiff_t>(best_start),
                                   src.begin() + static_cast<std::ptrdiff_t>(best_start + best_len));
    };
    split.train.ia = slice(signal.ia);
    split.train.ib = slice(signal.ib);
    split.train.ic = slice(signal.ic);
    split.train.va = slice(signal.va);
    split.train.vb = slice(signal.vb);
    split.train.vc = slice(signal.vc);
    split.train.fault_mask.assign(best_len, 0);
    return split;
}

}  // namespace fdet
