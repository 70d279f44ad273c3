#pragma once

// Trial records and their CSV form. Header row, RFC 4180 quoting, LF line
// endings; files are written to a temporary sibling and renamed into place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../io.hpp"
#include "../solvers.hpp"

namespace sparserec {

struct TrialRecord {
    std::size_t trial_id = 0;
    std::size_t m = 0, n = 0, s = 0;
    std::uint64_t seed = 0;
    double err_l1 = 0.0, err_l2 = 0.0, err_lq = 0.0;
    double sigma_s_l1 = 0.0;
    double eps_used = 0.0;
    double objective = 0.0;
    SolveStatus status = SolveStatus::max_iters;
    std::optional<bool> consistent;       ///< quantizer rule only
    std::optional<double> wall_time_ms;   ///< only when timing is requested
    bool success = false;                 ///< err_l2 <= 1e-6 max(1, ||x||_2)

    bool operator==(const TrialRecord&) const = default;
};

inline constexpr const char* kCsvHeader =
    "trial_id,m,n,s,seed,err_l1,err_l2,err_lq,sigma_s_l1,eps_used,objective,status,consistent,wall_time_ms,success";

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_csv(const std::vector<TrialRecord>& records) {
    using io::format_double;
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const TrialRecord& r : records) {
        const std::string fields[] = {
            std::to_string(r.trial_id),
            std::to_string(r.m),
            std::to_string(r.n),
            std::to_string(r.s),
            std::to_string(r.seed),
            format_double(r.err_l1),
            format_double(r.err_l2),
            format_double(r.err_lq),
            format_double(r.sigma_s_l1),
            format_double(r.eps_used),
            format_double(r.objective),
            to_string(r.status),
            r.consistent ? (*r.consistent ? "true" : "false") : "",
            r.wall_time_ms ? format_double(*r.wall_time_ms) : "",
            r.success ? "true" : "false",
        };
        bool first = true;
        for (const std::string& f : fields) {
            if (!first) os << ',';
            os << csv_escape(f);
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

/// Writes `content` to path via a temporary file and an atomic rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw InvalidArgument("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw InvalidArgument("cannot rename into '" + path + "': " + ec.message());
    }
}

inline void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    write_file_atomic(path, format_csv(records));
}

}  // namespace sparserec
