#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "netgain/errors.hpp"
#include "netgain/matrix.hpp"
#include "netgain/netsim.hpp"
#include "netgain/smallgain.hpp"

namespace netgain {

namespace detail {

inline std::pair<int, int> offset_to_position(const std::string& text, std::size_t offset) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = offset_to_position(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("invalid JSON", line, col);
    }
}

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok |= it.key() == k;
        if (!ok)
            throw InvalidInputError(std::string(where) + ": unknown key \"" + it.key() + "\"");
    }
}

inline double require_number(const nlohmann::json& obj, const char* key, const char* where) {
    if (!obj.contains(key))
        throw InvalidInputError(std::string(where) + ": missing key \"" + key + "\"");
    if (!obj[key].is_number())
        throw InvalidInputError(std::string(where) + ": key \"" + key + "\" must be a number");
    return obj[key].get<double>();
}

inline Vec json_to_vec(const nlohmann::json& arr, const char* where) {
    if (!arr.is_array()) throw InvalidInputError(std::string(where) + ": expected an array");
    Vec out;
    out.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw InvalidInputError(std::string(where) + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline Matrix json_to_matrix(const nlohmann::json& arr, const char* where) {
    if (!arr.is_array() || arr.empty())
        throw InvalidInputError(std::string(where) + ": expected a nonempty array of rows");
    const int rows = static_cast<int>(arr.size());
    Vec flat;
    int cols = -1;
    for (const auto& row : arr) {
        Vec r = json_to_vec(row, where);
        if (cols < 0)
            cols = static_cast<int>(r.size());
        else if (static_cast<int>(r.size()) != cols)
            throw InvalidInputError(std::string(where) + ": ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    if (cols <= 0) throw InvalidInputError(std::string(where) + ": empty rows");
    return Matrix(rows, cols, std::move(flat));
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

/// Parses the network description:
///   {"subsystems": [{"gamma": .., "beta": .., "m": ..}, ...],
///    "A": [[..], ..],
///    "rank_one": {"s": [..], "k": [..], "g": [..]}}   (optional)
/// Unknown keys are rejected at every level.
inline NetworkSpec parse_network(const std::string& text) {
    const nlohmann::json root = detail::parse_json(text);
    if (!root.is_object()) throw InvalidInputError("network: expected a JSON object");
    detail::reject_unknown_keys(root, {"subsystems", "A", "rank_one"}, "network");
    if (!root.contains("subsystems") || !root["subsystems"].is_array())
        throw InvalidInputError("network: missing \"subsystems\" array");
    if (!root.contains("A")) throw InvalidInputError("network: missing \"A\"");

    NetworkSpec net;
    for (const auto& s : root["subsystems"]) {
        if (!s.is_object()) throw InvalidInputError("subsystems: expected objects");
        detail::reject_unknown_keys(s, {"gamma", "beta", "m"}, "subsystems");
        SubsystemGain g;
        g.gamma = detail::require_number(s, "gamma", "subsystems");
        g.beta = s.contains("beta") ? detail::require_number(s, "beta", "subsystems") : 0.0;
        if (s.contains("m")) {
            if (!s["m"].is_number_integer())
                throw InvalidInputError("subsystems: key \"m\" must be an integer");
            g.m = s["m"].get<int>();
        }
        net.subsystems.push_back(g);
    }
    net.a = detail::json_to_matrix(root["A"], "A");

    if (root.contains("rank_one")) {
        const auto& r = root["rank_one"];
        if (!r.is_object()) throw InvalidInputError("rank_one: expected an object");
        detail::reject_unknown_keys(r, {"s", "k", "g"}, "rank_one");
        RankOneInterconnection conn;
        for (const char* key : {"s", "k", "g"})
            if (!r.contains(key))
                throw InvalidInputError(std::string("rank_one: missing key \"") + key + "\"");
        conn.s = detail::json_to_vec(r["s"], "rank_one.s");
        conn.k = detail::json_to_vec(r["k"], "rank_one.k");
        conn.g = detail::json_to_vec(r["g"], "rank_one.g");
        net.rank_one = std::move(conn);
    }
    net.validate();
    return net;
}

/// Parses {"delta": [..], "u": [..], "v": [..]}.
inline RankOnePerturbation parse_rank_one(const std::string& text) {
    const nlohmann::json root = detail::parse_json(text);
    if (!root.is_object()) throw InvalidInputError("rank-one: expected a JSON object");
    detail::reject_unknown_keys(root, {"delta", "u", "v"}, "rank-one");
    for (const char* key : {"delta", "u", "v"})
        if (!root.contains(key))
            throw InvalidInputError(std::string("rank-one: missing key \"") + key + "\"");
    RankOnePerturbation p;
    p.delta = detail::json_to_vec(root["delta"], "rank-one.delta");
    p.u = detail::json_to_vec(root["u"], "rank-one.u");
    p.v = detail::json_to_vec(root["v"], "rank-one.v");
    return p;
}

/// Parses {"F": [[..]], "G": [[..]], "H": [[..]], "J": [[..]]}. F may be an
/// empty array for a static system.
inline LtiSystem parse_lti(const std::string& text) {
    const nlohmann::json root = detail::parse_json(text);
    if (!root.is_object()) throw InvalidInputError("system: expected a JSON object");
    detail::reject_unknown_keys(root, {"F", "G", "H", "J"}, "system");
    for (const char* key : {"F", "G", "H", "J"})
        if (!root.contains(key))
            throw InvalidInputError(std::string("system: missing key \"") + key + "\"");

    LtiSystem sys;
    sys.j = detail::json_to_matrix(root["J"], "J");
    const int m = sys.j.rows();
    const bool has_state = root["F"].is_array() && !root["F"].empty();
    if (has_state) {
        sys.f = detail::json_to_matrix(root["F"], "F");
        sys.g = detail::json_to_matrix(root["G"], "G");
        sys.h = detail::json_to_matrix(root["H"], "H");
    } else {
        sys.f = Matrix(0, 0);
        sys.g = Matrix(0, m);
        sys.h = Matrix(m, 0);
    }
    sys.validate();
    return sys;
}

}  // namespace netgain
