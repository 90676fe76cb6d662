#pragma once

#include <string>
#include <vector>

namespace bivar {

struct Violation {
    std::string clause;
    std::string witness;
};

/// Ordered list of violated clauses. Validation routines never throw on a
/// mathematical failure; they append here instead.
class ValidationReport {
public:
    void add(std::string clause, std::string witness) { items_.push_back({std::move(clause), std::move(witness)}); }
    void merge(const ValidationReport& other) { items_.insert(items_.end(), other.items_.begin(), other.items_.end()); }

    bool ok() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }
    const std::vector<Violation>& violations() const noexcept { return items_; }
    bool has_clause(const std::string& clause) const
    {
        for (const auto& v : items_)
            if (v.clause == clause)
                return true;
        return false;
    }

    /// One "clause: witness" line per violation.
    std::string to_text() const
    {
        std::string s;
        for (const auto& v : items_)
            s += v.clause + ": " + v.witness + "\n";
        return s;
    }

private:
    std::vector<Violation> items_;
};

}  // namespace bivar
