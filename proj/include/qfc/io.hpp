#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfc/robustness.hpp"
#include "qfc/twostate.hpp"

namespace qfc::io {

using json = nlohmann::json;

// Every number leaving the toolkit goes through here: 9 significant digits.
inline std::string fmt9(double v) {
    if (v == 0.0)
        return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Rounded to 9 significant digits; nlohmann prints the shortest round-trip
// form, so the JSON text carries at most 9 digits too.
inline double round9(double v) {
    if (!std::isfinite(v) || v == 0.0)
        return v == 0.0 ? 0.0 : v;
    return std::stod(fmt9(v));
}

// ============================================================================
// Matrices: nested arrays of [re, im], row-major. Plain numbers are accepted
// as real entries on input.
// ============================================================================

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({round9(m(i, j).real()), round9(m(i, j).imag())}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const HermitianMatrix& m) { return to_json(m.matrix()); }
inline json to_json(const DensityState& m) { return to_json(m.matrix()); }

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ParseError("matrix: expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ParseError("matrix: rows must form a square array");
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto& e = row[static_cast<std::size_t>(c)];
            if (e.is_number())
                m(i, c) = e.get<double>();
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                m(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
            else
                throw ParseError("matrix: entries must be numbers or [re, im] pairs");
        }
    }
    return m;
}

inline HermitianMatrix hermitian_from_json(const json& j) { return HermitianMatrix(matrix_from_json(j)); }

inline json parse_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline LabelSet labels_from_json(const json& j) {
    if (!j.is_array())
        throw ParseError("labels: expected an array");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (e.is_string())
            out.push_back(e.get<std::string>());
        else if (e.is_number())
            out.push_back(e.dump());
        else
            throw ParseError("labels: expected strings or numbers");
    }
    return LabelSet(std::move(out));
}

inline std::vector<Matrix> matrices(const json& j) {
    if (!j.is_array())
        throw ParseError("expected an array of matrices");
    std::vector<Matrix> out;
    for (const auto& m : j)
        out.push_back(matrix_from_json(m));
    return out;
}

// Per-control entries may be keyed by label or listed in label order.
inline std::vector<json> per_control(const json& j, const LabelSet& controls, const char* what) {
    std::vector<json> out;
    if (j.is_object()) {
        for (std::size_t u = 0; u < controls.size(); ++u) {
            if (!j.contains(controls[u]))
                throw ParseError(std::string(what) + ": missing entry for control " + controls[u]);
            out.push_back(j.at(controls[u]));
        }
    } else if (j.is_array() && j.size() == controls.size()) {
        out.assign(j.begin(), j.end());
    } else {
        throw ParseError(std::string(what) + ": need one entry per control");
    }
    return out;
}

template <class F>
auto wrap_json(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

} // namespace detail

// {"dimension", "controls", "outcomes", and either
//  "kraus_families" (per control), "projectors", "kernel" ([y][a]) or
//  "gamma_terms" ([control][outcome] -> list of matrices)}.
inline TransferModel model_from_json(const json& j) {
    return detail::wrap_json([&] {
        const auto dim = detail::field(j, "dimension").get<std::size_t>();
        LabelSet controls = detail::labels_from_json(detail::field(j, "controls"));
        LabelSet outcomes = detail::labels_from_json(detail::field(j, "outcomes"));
        if (j.contains("gamma_terms")) {
            std::vector<std::vector<std::vector<Matrix>>> terms;
            for (const auto& per_u : detail::per_control(j.at("gamma_terms"), controls, "gamma_terms")) {
                std::vector<std::vector<Matrix>> row;
                if (per_u.is_object()) {
                    for (std::size_t y = 0; y < outcomes.size(); ++y)
                        row.push_back(detail::matrices(detail::field(per_u, outcomes[y].c_str())));
                } else {
                    for (const auto& per_y : per_u)
                        row.push_back(detail::matrices(per_y));
                }
                terms.push_back(std::move(row));
            }
            return TransferModel::explicit_terms(dim, std::move(controls), std::move(outcomes), std::move(terms));
        }
        std::vector<KrausFamily> dyn;
        for (const auto& fam : detail::per_control(detail::field(j, "kraus_families"), controls, "kraus_families"))
            dyn.push_back(KrausFamily{detail::matrices(fam)});
        MeasurementSpec meas;
        meas.projectors = detail::matrices(detail::field(j, "projectors"));
        meas.kernel = detail::field(j, "kernel").get<std::vector<std::vector<double>>>();
        return build_imperfect_model(dim, std::move(controls), std::move(outcomes), std::move(dyn), std::move(meas));
    });
}

inline json model_to_json(const TransferModel& m) {
    json j;
    j["dimension"] = m.dim();
    j["controls"] = m.controls().labels();
    j["outcomes"] = m.outcomes().labels();
    if (const auto* s = m.structural_repr()) {
        json fams = json::object();
        for (std::size_t u = 0; u < m.num_controls(); ++u) {
            json ops = json::array();
            for (const auto& k : s->dynamics[u].operators)
                ops.push_back(to_json(k));
            fams[m.controls()[u]] = std::move(ops);
        }
        j["kraus_families"] = std::move(fams);
        json projs = json::array();
        for (const auto& p : s->measurement.projectors)
            projs.push_back(to_json(p));
        j["projectors"] = std::move(projs);
        j["kernel"] = s->measurement.kernel;
    } else if (const auto* e = m.explicit_repr()) {
        json terms = json::object();
        for (std::size_t u = 0; u < m.num_controls(); ++u) {
            json per_u = json::object();
            for (std::size_t y = 0; y < m.num_outcomes(); ++y) {
                json ops = json::array();
                for (const auto& k : e->terms[u][y])
                    ops.push_back(to_json(k));
                per_u[m.outcomes()[y]] = std::move(ops);
            }
            terms[m.controls()[u]] = std::move(per_u);
        }
        j["gamma_terms"] = std::move(terms);
    }
    return j;
}

// {"stage": {label: matrix}, "terminal": matrix, "mu": number,
//  "variant": "risk_sensitive" | "linear_kraus", "kraus_costs": {label: [matrix]}}
struct CostFile {
    CostModel cost;
    OperatorValuedCost rcost;
};

inline CostFile cost_from_json(const json& j, const LabelSet& controls) {
    return detail::wrap_json([&] {
        std::vector<HermitianMatrix> stage;
        for (const auto& m : detail::per_control(detail::field(j, "stage"), controls, "stage"))
            stage.push_back(hermitian_from_json(m));
        const double mu = j.value("mu", 0.0);
        CostModel cost(stage, hermitian_from_json(detail::field(j, "terminal")), mu);
        const std::string variant = j.value("variant", std::string("risk_sensitive"));
        if (variant == "risk_sensitive")
            return CostFile{cost, OperatorValuedCost::risk_sensitive(cost)};
        if (variant != "linear_kraus")
            throw ParseError("cost: unknown variant '" + variant + "'");
        std::vector<std::vector<HermitianMatrix>> z;
        for (const auto& fam : detail::per_control(detail::field(j, "kraus_costs"), controls, "kraus_costs")) {
            std::vector<HermitianMatrix> ops;
            for (const auto& m : fam)
                ops.push_back(hermitian_from_json(m));
            z.push_back(std::move(ops));
        }
        return CostFile{cost, OperatorValuedCost::linear_kraus(std::move(z))};
    });
}

// ============================================================================
// Reports
// ============================================================================

inline json labels_of(const History& h, const LabelSet& outcomes) {
    json path = json::array();
    for (auto y : h)
        path.push_back(outcomes[y]);
    return path;
}

// Nested records keyed by outcome label.
inline json policy_to_json(const PolicyTree& tree, const TransferModel& model, const History& h = {}) {
    const auto& node = tree.at(h);
    json j;
    j["history"] = labels_of(h, model.outcomes());
    if (node.control)
        j["control"] = model.controls()[*node.control];
    else
        j["control"] = nullptr;
    j["value"] = round9(node.value);
    json comparands = json::object();
    for (std::size_t u = 0; u < node.comparands.size(); ++u)
        comparands[model.controls()[u]] = round9(node.comparands[u]);
    if (!node.comparands.empty())
        j["comparands"] = std::move(comparands);
    j["state"] = to_json(node.state);
    if (node.control) {
        json probs = json::object();
        json children = json::object();
        for (std::size_t y = 0; y < node.branch_probs.size(); ++y) {
            probs[model.outcomes()[y]] = round9(node.branch_probs[y]);
            History child = h;
            child.push_back(y);
            if (tree.find(child))
                children[model.outcomes()[y]] = policy_to_json(tree, model, child);
        }
        j["branch_probabilities"] = std::move(probs);
        j["children"] = std::move(children);
    }
    return j;
}

inline json trajectory_to_json(const Trajectory& t, const TransferModel& model) {
    json j;
    json controls = json::array();
    for (auto u : t.controls)
        controls.push_back(model.controls()[u]);
    j["controls"] = std::move(controls);
    j["outcomes"] = labels_of(t.outcomes, model.outcomes());
    j["probability"] = round9(t.probability);
    json states = json::array();
    for (const auto& s : t.states)
        states.push_back(to_json(s));
    j["states"] = std::move(states);
    return j;
}

inline std::string history_string(const History& h, const LabelSet& outcomes) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i)
            s += ' ';
        s += outcomes[h[i]];
    }
    return s;
}

// Inline rendering, e.g. [[0.5, 0.5], [0.5, 0.5]]; imaginary parts appear
// only when nonzero.
inline std::string pretty(const Matrix& m) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        s += i ? ", [" : "[";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j)
                s += ", ";
            const double re = round9(m(i, j).real());
            const double im = round9(m(i, j).imag());
            if (im == 0.0)
                s += fmt9(re);
            else
                s += fmt9(re) + (im < 0 ? "-" : "+") + fmt9(std::abs(im)) + "i";
        }
        s += "]";
    }
    return s + "]";
}

inline std::string pretty(const HermitianMatrix& m) { return pretty(m.matrix()); }
inline std::string pretty(const DensityState& m) { return pretty(m.matrix()); }

} // namespace qfc::io
