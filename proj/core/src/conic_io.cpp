#include "ropf/conic_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ropf {

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_value(const std::string& tok, int line_no) {
    if (tok == "inf") return kInf;
    if (tok == "-inf") return -kInf;
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        std::ostringstream os;
        os << "line " << line_no << ": bad numeric token '" << tok << "'";
        throw ConicIoError(os.str());
    }
    return v;
}

int parse_index(const std::string& tok, int line_no) {
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || v < 0) {
        std::ostringstream os;
        os << "line " << line_no << ": bad index token '" << tok << "'";
        throw ConicIoError(os.str());
    }
    return static_cast<int>(v);
}

std::pair<int, double> parse_pair(const std::string& tok, int line_no) {
    size_t colon = tok.find(':');
    if (colon == std::string::npos) {
        std::ostringstream os;
        os << "line " << line_no << ": expected idx:value, got '" << tok << "'";
        throw ConicIoError(os.str());
    }
    return {parse_index(tok.substr(0, colon), line_no),
            parse_value(tok.substr(colon + 1), line_no)};
}

} // namespace

std::string export_conic_text(const ConicProgram& prog) {
    std::ostringstream os;
    os << "CONIC/1\n";
    os << "vars " << prog.num_vars() << "\n";
    os << "rows " << prog.rows.size() << "\n";
    os << "cones " << prog.cones.size() << "\n";
    os << "objconst " << fmt(prog.obj_constant) << "\n";
    os << "obj";
    for (int i = 0; i < prog.num_vars(); ++i)
        if (prog.obj[i] != 0.0) os << " " << i << ":" << fmt(prog.obj[i]);
    os << "\n";
    for (int i = 0; i < prog.num_vars(); ++i)
        if (!prog.var_names[i].empty()) os << "name " << i << " " << prog.var_names[i] << "\n";
    for (int i = 0; i < prog.num_vars(); ++i)
        if (prog.lb[i] != -kInf || prog.ub[i] != kInf)
            os << "bound " << i << " " << fmt(prog.lb[i]) << " " << fmt(prog.ub[i]) << "\n";
    for (const auto& row : prog.rows) {
        os << "row " << fmt(row.rhs);
        for (const auto& [idx, coef] : row.terms) os << " " << idx << ":" << fmt(coef);
        os << "\n";
    }
    for (const auto& cone : prog.cones) {
        os << (cone.kind == ConeKind::SecondOrder ? "soc" : "rsoc");
        for (int idx : cone.vars) os << " " << idx;
        os << "\n";
    }
    os << "end\n";
    return os.str();
}

ConicProgram parse_conic_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto next_line = [&](std::string& out) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            out = line;
            return true;
        }
        return false;
    };
    std::string cur;
    if (!next_line(cur) || cur != "CONIC/1")
        throw ConicIoError("missing CONIC/1 header");

    ConicProgram prog;
    bool saw_end = false;
    long declared_rows = -1, declared_cones = -1;
    while (next_line(cur)) {
        std::istringstream ls(cur);
        std::string kw;
        ls >> kw;
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        auto need = [&](size_t n) {
            if (toks.size() < n) {
                std::ostringstream os;
                os << "line " << line_no << ": '" << kw << "' needs " << n << " fields";
                throw ConicIoError(os.str());
            }
        };
        if (kw == "vars") {
            need(1);
            int n = parse_index(toks[0], line_no);
            prog.obj.assign(n, 0.0);
            prog.lb.assign(n, -kInf);
            prog.ub.assign(n, kInf);
            prog.var_names.assign(n, "");
        } else if (kw == "rows") {
            need(1);
            declared_rows = parse_index(toks[0], line_no);
        } else if (kw == "cones") {
            need(1);
            declared_cones = parse_index(toks[0], line_no);
        } else if (kw == "objconst") {
            need(1);
            prog.obj_constant = parse_value(toks[0], line_no);
        } else if (kw == "obj") {
            for (const auto& t : toks) {
                auto [idx, v] = parse_pair(t, line_no);
                if (idx >= prog.num_vars()) throw ConicIoError("objective index out of range");
                prog.obj[idx] = v;
            }
        } else if (kw == "name") {
            need(2);
            int idx = parse_index(toks[0], line_no);
            if (idx >= prog.num_vars()) throw ConicIoError("name index out of range");
            prog.var_names[idx] = toks[1];
        } else if (kw == "bound") {
            need(3);
            int idx = parse_index(toks[0], line_no);
            if (idx >= prog.num_vars()) throw ConicIoError("bound index out of range");
            prog.lb[idx] = parse_value(toks[1], line_no);
            prog.ub[idx] = parse_value(toks[2], line_no);
        } else if (kw == "row") {
            need(1);
            SparseRow row;
            row.rhs = parse_value(toks[0], line_no);
            for (size_t i = 1; i < toks.size(); ++i)
                row.terms.push_back(parse_pair(toks[i], line_no));
            prog.rows.push_back(std::move(row));
        } else if (kw == "soc" || kw == "rsoc") {
            ConeBlock cone;
            cone.kind = kw == "soc" ? ConeKind::SecondOrder : ConeKind::RotatedSecondOrder;
            for (const auto& t : toks) cone.vars.push_back(parse_index(t, line_no));
            prog.cones.push_back(std::move(cone));
        } else if (kw == "end") {
            saw_end = true;
            break;
        } else {
            std::ostringstream os;
            os << "line " << line_no << ": unknown keyword '" << kw << "'";
            throw ConicIoError(os.str());
        }
    }
    if (!saw_end) throw ConicIoError("missing 'end' line");
    if (declared_rows >= 0 && declared_rows != static_cast<long>(prog.rows.size()))
        throw ConicIoError("row count mismatch");
    if (declared_cones >= 0 && declared_cones != static_cast<long>(prog.cones.size()))
        throw ConicIoError("cone count mismatch");
    auto issues = prog.validate();
    if (!issues.empty()) throw ConicIoError("parsed program invalid: " + issues.front());
    return prog;
}

std::string export_conic_json(const ConicProgram& prog) {
    nlohmann::json j;
    j["format"] = "CONIC/1";
    j["obj_constant"] = prog.obj_constant;
    j["obj"] = prog.obj;
    j["lb"] = nlohmann::json::array();
    j["ub"] = nlohmann::json::array();
    for (int i = 0; i < prog.num_vars(); ++i) {
        j["lb"].push_back(std::isinf(prog.lb[i]) ? nlohmann::json() : nlohmann::json(prog.lb[i]));
        j["ub"].push_back(std::isinf(prog.ub[i]) ? nlohmann::json() : nlohmann::json(prog.ub[i]));
    }
    j["names"] = prog.var_names;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : prog.rows) {
        nlohmann::json jr;
        jr["rhs"] = row.rhs;
        jr["idx"] = nlohmann::json::array();
        jr["val"] = nlohmann::json::array();
        for (const auto& [idx, coef] : row.terms) {
            jr["idx"].push_back(idx);
            jr["val"].push_back(coef);
        }
        j["rows"].push_back(std::move(jr));
    }
    j["cones"] = nlohmann::json::array();
    for (const auto& cone : prog.cones) {
        nlohmann::json jc;
        jc["kind"] = cone.kind == ConeKind::SecondOrder ? "soc" : "rsoc";
        jc["vars"] = cone.vars;
        j["cones"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

ConicProgram parse_conic_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConicIoError(std::string("bad json: ") + e.what());
    }
    if (j.value("format", "") != "CONIC/1") throw ConicIoError("missing CONIC/1 format tag");
    ConicProgram prog;
    prog.obj_constant = j.at("obj_constant").get<double>();
    prog.obj = j.at("obj").get<std::vector<double>>();
    int n = prog.num_vars();
    prog.lb.assign(n, -kInf);
    prog.ub.assign(n, kInf);
    for (int i = 0; i < n; ++i) {
        if (!j.at("lb")[i].is_null()) prog.lb[i] = j.at("lb")[i].get<double>();
        if (!j.at("ub")[i].is_null()) prog.ub[i] = j.at("ub")[i].get<double>();
    }
    prog.var_names = j.at("names").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
        SparseRow row;
        row.rhs = jr.at("rhs").get<double>();
        const auto& idx = jr.at("idx");
        const auto& val = jr.at("val");
        for (size_t k = 0; k < idx.size(); ++k)
            row.terms.emplace_back(idx[k].get<int>(), val[k].get<double>());
        prog.rows.push_back(std::move(row));
    }
    for (const auto& jc : j.at("cones")) {
        ConeBlock cone;
        cone.kind = jc.at("kind") == "soc" ? ConeKind::SecondOrder : ConeKind::RotatedSecondOrder;
        cone.vars = jc.at("vars").get<std::vector<int>>();
        prog.cones.push_back(std::move(cone));
    }
    auto issues = prog.validate();
    if (!issues.empty()) throw ConicIoError("parsed program invalid: " + issues.front());
    return prog;
}

} // namespace ropf
