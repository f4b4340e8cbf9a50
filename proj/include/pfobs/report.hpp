#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace pfobs {

/// One checked property with its measured value and the bound it was held to.
struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string note;
};

struct Report {
    std::vector<Check> checks;

    void add(std::string name, bool passed, double measured = 0.0, double bound = 0.0, std::string note = {}) {
        checks.push_back({std::move(name), passed, measured, bound, std::move(note)});
    }
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

}  // namespace pfobs
