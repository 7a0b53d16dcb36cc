#pragma once

// nlohmann/json bindings for the core types. Field names match the dataset and
// summary file formats.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "camvo/core.hpp"

namespace camvo {

using Json = nlohmann::json;

namespace detail {

inline Json vector_to_json(const Eigen::VectorXd& v) {
    return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd vector_from_json(const Json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Row-major nested arrays.
inline Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    const auto cols = n > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(n, cols);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) throw Error("ragged matrix in JSON");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

template <typename T>
Json optional_to_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace detail

inline void to_json(Json& j, const ArmSpec& a) {
    j = Json{{"id", a.arm_id}, {"name", a.name}, {"rho", a.cost_per_token}};
}
inline void from_json(const Json& j, ArmSpec& a) {
    a.arm_id = j.value("id", std::size_t{0});
    a.name = j.value("name", std::string{});
    a.cost_per_token = j.at("rho").get<double>();
}

inline void to_json(Json& j, const Instance& inst) {
    Json votes = Json::array();
    for (const auto& v : inst.cached_labels) votes.push_back(detail::optional_to_json(v));
    j = Json{{"id", inst.instance_id},
             {"embedding", detail::vector_to_json(inst.embedding)},
             {"tokens", inst.token_counts},
             {"votes", votes}};
    if (inst.true_label) j["label"] = *inst.true_label;
}
inline void from_json(const Json& j, Instance& inst) {
    const Json& id = j.at("id");
    inst.instance_id = id.is_string() ? id.get<std::string>() : id.dump();
    inst.embedding = detail::vector_from_json(j.at("embedding"));
    inst.token_counts = j.contains("tokens") ? j.at("tokens").get<std::vector<std::int64_t>>()
                                             : std::vector<std::int64_t>{};
    inst.cached_labels.clear();
    if (j.contains("votes"))
        for (const auto& v : j.at("votes"))
            inst.cached_labels.push_back(v.is_null() ? std::nullopt
                                                     : std::optional<Label>(v.get<Label>()));
    inst.true_label = detail::optional_from_json<Label>(j, "label");
}

inline void to_json(Json& j, const PolicyConfig& c) {
    j = Json{{"delta", c.delta},
             {"k_min", c.k_min},
             {"alpha_explore", c.alpha_explore},
             {"lambda_L", c.lambda_L},
             {"lambda_R", c.lambda_R},
             {"mode", std::string(to_string(c.mode))},
             {"confidence_method", std::string(to_string(c.confidence_method))},
             {"mc_samples", c.mc_samples},
             {"seed", c.seed},
             {"epsilon", c.epsilon}};
}
inline void from_json(const Json& j, PolicyConfig& c) {
    c.delta = j.at("delta").get<double>();
    c.k_min = j.at("k_min").get<std::size_t>();
    c.alpha_explore = j.at("alpha_explore").get<double>();
    c.lambda_L = j.at("lambda_L").get<double>();
    c.lambda_R = j.at("lambda_R").get<double>();
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.confidence_method = parse_confidence_method(j.at("confidence_method").get<std::string>());
    c.mc_samples = j.at("mc_samples").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epsilon = j.at("epsilon").get<double>();
}

inline void to_json(Json& j, const MomentStats& s) {
    j = Json{{"count", s.count}, {"mean", s.mean}, {"m2", s.m2}};
}
inline void from_json(const Json& j, MomentStats& s) {
    s.count = j.at("count").get<std::int64_t>();
    s.mean = j.at("mean").get<double>();
    s.m2 = j.at("m2").get<double>();
}

inline void to_json(Json& j, const BetaParams& p) {
    j = Json{{"alpha1", p.alpha1}, {"beta1", p.beta1}, {"alpha0", p.alpha0}, {"beta0", p.beta0}};
}
inline void from_json(const Json& j, BetaParams& p) {
    p.alpha1 = j.at("alpha1").get<double>();
    p.beta1 = j.at("beta1").get<double>();
    p.alpha0 = j.at("alpha0").get<double>();
    p.beta0 = j.at("beta0").get<double>();
}

inline void to_json(Json& j, const ArmState& s) {
    j = Json{{"A", detail::matrix_to_json(s.A)},
             {"A_inv", detail::matrix_to_json(s.A_inv)},
             {"b", detail::vector_to_json(s.b)},
             {"queries", s.queries},
             {"correct_count", s.correct_count},
             {"beta", s.beta},
             {"class_stats", {s.class_stats[0], s.class_stats[1]}},
             {"class_fitted", {s.class_fitted[0], s.class_fitted[1]}},
             {"updates_since_reinversion", s.updates_since_reinversion}};
}
inline void from_json(const Json& j, ArmState& s) {
    s.A = detail::matrix_from_json(j.at("A"));
    s.A_inv = detail::matrix_from_json(j.at("A_inv"));
    s.b = detail::vector_from_json(j.at("b"));
    s.queries = j.at("queries").get<std::int64_t>();
    s.correct_count = j.at("correct_count").get<std::int64_t>();
    s.beta = j.at("beta").get<BetaParams>();
    for (int h = 0; h < 2; ++h) {
        s.class_stats[h] = j.at("class_stats").at(h).get<MomentStats>();
        s.class_fitted[h] = j.at("class_fitted").at(h).get<bool>();
    }
    s.updates_since_reinversion = j.at("updates_since_reinversion").get<std::int64_t>();
}

inline void to_json(Json& j, const ConfidenceRecord& r) {
    j = Json{{"q", r.q},         {"width", r.width}, {"theta", r.theta},
             {"L_bar", r.L_bar}, {"L", r.L},         {"omega", r.omega}};
}
inline void from_json(const Json& j, ConfidenceRecord& r) {
    r.q = j.at("q").get<double>();
    r.width = j.at("width").get<double>();
    r.theta = j.at("theta").get<double>();
    r.L_bar = j.at("L_bar").get<double>();
    r.L = j.at("L").get<double>();
    r.omega = j.at("omega").get<double>();
}

inline void to_json(Json& j, const SubsetDecision& d) {
    j = Json{{"arms", d.arms},
             {"confidence", d.confidence},
             {"cost", d.cost},
             {"fell_back_to_all", d.fell_back_to_all}};
}
inline void from_json(const Json& j, SubsetDecision& d) {
    d.arms = j.at("arms").get<std::vector<std::size_t>>();
    d.confidence = j.at("confidence").get<double>();
    d.cost = j.at("cost").get<double>();
    d.fell_back_to_all = j.at("fell_back_to_all").get<bool>();
}

inline void to_json(Json& j, const RoundRecord& r) {
    j = Json{{"t", r.t},
             {"decision", r.decision},
             {"votes", r.votes},
             {"predicted", r.predicted},
             {"rewards", r.rewards},
             {"true_label", detail::optional_to_json(r.true_label)},
             {"cumulative_cost", r.cumulative_cost},
             {"cumulative_accuracy", detail::optional_to_json(r.cumulative_accuracy)}};
}
inline void from_json(const Json& j, RoundRecord& r) {
    r.t = j.at("t").get<std::size_t>();
    r.decision = j.at("decision").get<SubsetDecision>();
    r.votes = j.at("votes").get<std::vector<Label>>();
    r.predicted = j.at("predicted").get<Label>();
    r.rewards = j.at("rewards").get<std::vector<int>>();
    r.true_label = detail::optional_from_json<Label>(j, "true_label");
    r.cumulative_cost = j.at("cumulative_cost").get<double>();
    r.cumulative_accuracy = detail::optional_from_json<double>(j, "cumulative_accuracy");
}

inline void to_json(Json& j, const DatasetHeader& h) {
    Json arms = Json::array();
    for (const auto& a : h.arms) arms.push_back(Json{{"name", a.name}, {"rho", a.cost_per_token}});
    j = Json{{"d", h.dim}, {"K", h.arm_count}, {"M", h.label_count}, {"arms", arms}};
    if (!h.label_names.empty()) j["labels"] = h.label_names;
}
inline void from_json(const Json& j, DatasetHeader& h) {
    h.dim = j.at("d").get<std::size_t>();
    h.arm_count = j.at("K").get<std::size_t>();
    h.label_count = j.at("M").get<std::size_t>();
    h.arms.clear();
    std::size_t id = 0;
    for (const auto& a : j.at("arms")) {
        ArmSpec spec;
        spec.arm_id = a.contains("id") ? a.at("id").get<std::size_t>() : id;
        spec.name = a.value("name", "arm" + std::to_string(id));
        spec.cost_per_token = a.at("rho").get<double>();
        h.arms.push_back(std::move(spec));
        ++id;
    }
    h.label_names = j.contains("labels") ? j.at("labels").get<std::vector<std::string>>()
                                         : std::vector<std::string>{};
}

}  // namespace camvo
