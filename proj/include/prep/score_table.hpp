#pragma once

#include "prep/common.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace prep {

/// Whether a large raw score means "more relevant". PReP's penalty ranks
/// lower-is-more-relevant; the classic baselines rank higher-is-more-relevant.
/// Every consumer goes through oriented() so raw magnitudes are never
/// compared across measures.
enum class Direction { HigherMoreRelevant, LowerMoreRelevant };

inline const char* direction_name(Direction d) {
    return d == Direction::HigherMoreRelevant ? "higher" : "lower";
}

/// Composite relevance scores for the nontrivial pairs of one measure.
/// Candidate pairs absent from the table are trivial and rank below every
/// entry (a tied -inf oriented score).
struct ScoreTable {
    struct Entry {
        std::string u;
        std::string v;
        double score = 0.0;
    };

    std::string measure_id;
    std::string fingerprint; // parameter/config fingerprint
    Direction direction = Direction::HigherMoreRelevant;
    std::vector<Entry> entries;
    WarningList warnings;

    double oriented(double raw) const {
        return direction == Direction::LowerMoreRelevant ? -raw : raw;
    }

    /// Oriented score for an unordered pair; -inf when the pair is absent.
    double oriented_score(const std::string& a, const std::string& b) const {
        ensure_index();
        auto k = a < b ? a + "\t" + b : b + "\t" + a;
        auto it = index_.find(k);
        if (it == index_.end())
            return -std::numeric_limits<double>::infinity();
        return oriented(entries[it->second].score);
    }

    void ensure_index() const {
        if (index_.size() == entries.size())
            return;
        index_.clear();
        for (size_t i = 0; i < entries.size(); ++i) {
            const Entry& e = entries[i];
            index_.emplace(e.u < e.v ? e.u + "\t" + e.v : e.v + "\t" + e.u, i);
        }
    }

  private:
    mutable std::unordered_map<std::string, size_t> index_;
};

/// Writes `u<TAB>v<TAB>score<TAB>direction`, most relevant first
/// (ties broken by pair ids so the bytes are stable).
inline void write_score_table(std::ostream& out, const ScoreTable& st,
                              const std::vector<std::string>& header_lines = {}) {
    out << "# prep " << kToolVersion << " scores\n";
    out << "# measure\t" << st.measure_id << "\n";
    out << "# direction\t" << direction_name(st.direction) << "\n";
    if (!st.fingerprint.empty())
        out << "# fingerprint\t" << st.fingerprint << "\n";
    for (const std::string& h : header_lines)
        out << "# " << h << "\n";
    std::vector<const ScoreTable::Entry*> order;
    order.reserve(st.entries.size());
    for (const auto& e : st.entries)
        order.push_back(&e);
    std::sort(order.begin(), order.end(),
              [&](const ScoreTable::Entry* a, const ScoreTable::Entry* b) {
                  const double oa = st.oriented(a->score), ob = st.oriented(b->score);
                  if (oa != ob)
                      return oa > ob;
                  if (a->u != b->u)
                      return a->u < b->u;
                  return a->v < b->v;
              });
    for (const ScoreTable::Entry* e : order)
        out << e->u << "\t" << e->v << "\t" << fmt_double(e->score) << "\t"
            << direction_name(st.direction) << "\n";
}

inline ScoreTable read_score_table(std::istream& in, const std::string& name = "<scores>") {
    ScoreTable st;
    std::string line;
    size_t lineno = 0;
    bool direction_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string l{strip_cr(line)};
        if (l.empty())
            continue;
        if (l[0] == '#') {
            std::vector<std::string> f = split(l.size() > 2 ? l.substr(2) : "", '\t');
            if (f.size() == 2 && f[0] == "measure")
                st.measure_id = f[1];
            else if (f.size() == 2 && f[0] == "fingerprint")
                st.fingerprint = f[1];
            else if (f.size() == 2 && f[0] == "direction") {
                st.direction = f[1] == "lower" ? Direction::LowerMoreRelevant
                                               : Direction::HigherMoreRelevant;
                direction_seen = true;
            }
            continue;
        }
        std::vector<std::string> f = split(l, '\t');
        const std::string ctx = name + ":" + std::to_string(lineno);
        if (f.size() != 4)
            throw ParseError(ctx + ": expected u<TAB>v<TAB>score<TAB>direction");
        Direction d = f[3] == "lower" ? Direction::LowerMoreRelevant
                                      : Direction::HigherMoreRelevant;
        if (f[3] != "lower" && f[3] != "higher")
            throw ParseError(ctx + ": bad direction '" + f[3] + "'");
        if (direction_seen && d != st.direction)
            throw ValidationError(ctx + ": direction flag conflicts with the header");
        st.direction = d;
        direction_seen = true;
        st.entries.push_back({f[0], f[1], parse_double(f[2], ctx)});
    }
    return st;
}

inline void write_score_table_file(const std::string& path, const ScoreTable& st,
                                   const std::vector<std::string>& header_lines = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    write_score_table(out, st, header_lines);
}

inline ScoreTable read_score_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("score file '" + path + "' cannot be opened");
    return read_score_table(in, path);
}

} // namespace prep
