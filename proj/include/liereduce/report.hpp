#pragma once

#include <optional>
#include <string>
#include <vector>

namespace liereduce {

// Flat result record, serialized as one JSON object with a fixed key set so
// reports are byte-stable for fixed inputs.
struct Report {
    std::string command;
    std::string status = "ok"; // ok | fail | unsupported
    std::vector<std::string> witnesses;
    std::optional<double> residual_max;
    std::optional<std::string> mu;
    std::vector<std::string> alpha;
    std::vector<std::vector<std::string>> lambda;
    std::vector<std::string> reduced;
    std::vector<std::string> notes;

    // Marks the report failed; a failing report always carries a witness.
    void fail(const std::string& witness);

    std::string to_json() const; // 2-space indent, no trailing newline
};

// Array form for multi-entry runs, serialized in the given order.
std::string reports_to_json(const std::vector<Report>& entries);

} // namespace liereduce
