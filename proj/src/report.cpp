#include "liereduce/report.hpp"

#include "json.hpp"

namespace liereduce {

namespace {

nlohmann::json to_object(const Report& r) {
    nlohmann::json j;
    j["command"] = r.command;
    j["status"] = r.status;
    j["witnesses"] = r.witnesses;
    j["residual_max"] = r.residual_max ? nlohmann::json(*r.residual_max) : nlohmann::json();
    j["mu"] = r.mu ? nlohmann::json(*r.mu) : nlohmann::json();
    j["alpha"] = r.alpha;
    j["lambda"] = r.lambda;
    j["reduced"] = r.reduced;
    j["notes"] = r.notes;
    return j;
}

} // namespace

void Report::fail(const std::string& witness) {
    status = "fail";
    witnesses.push_back(witness.empty() ? "unspecified failure" : witness);
}

std::string Report::to_json() const { return to_object(*this).dump(2); }

std::string reports_to_json(const std::vector<Report>& entries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Report& r : entries) arr.push_back(to_object(r));
    return arr.dump(2);
}

} // namespace liereduce
