#include "ropf/matpower.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

namespace ropf {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void fail(int line, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line << ": " << msg;
    throw CaseFormatError(os.str());
}

// Strip '%' comments, keep line structure.
std::string strip_comments(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_quote = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\'') in_quote = !in_quote;
        if (c == '%' && !in_quote) {
            while (i < text.size() && text[i] != '\n') ++i;
            if (i < text.size()) out.push_back('\n');
            continue;
        }
        out.push_back(c);
    }
    return out;
}

struct Cursor {
    const std::string& s;
    size_t pos = 0;
    int line = 1;

    void advance(size_t to) {
        for (; pos < to && pos < s.size(); ++pos)
            if (s[pos] == '\n') ++line;
    }
    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
            if (s[pos] == '\n') ++line;
            ++pos;
        }
    }
};

// Parse a bracketed numeric matrix starting at '['. Rows end at ';' or newline.
std::vector<std::vector<double>> parse_matrix(Cursor& cur) {
    cur.skip_ws();
    if (cur.pos >= cur.s.size() || cur.s[cur.pos] != '[')
        fail(cur.line, "expected '['");
    ++cur.pos;
    std::vector<std::vector<double>> rows;
    std::vector<double> row;
    auto flush_row = [&]() {
        if (!row.empty()) rows.push_back(std::move(row));
        row.clear();
    };
    while (cur.pos < cur.s.size()) {
        char c = cur.s[cur.pos];
        if (c == ']') {
            ++cur.pos;
            flush_row();
            return rows;
        }
        if (c == ';' || c == '\n') {
            if (c == '\n') ++cur.line;
            ++cur.pos;
            flush_row();
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            ++cur.pos;
            continue;
        }
        char* end = nullptr;
        double v = std::strtod(cur.s.c_str() + cur.pos, &end);
        if (end == cur.s.c_str() + cur.pos)
            fail(cur.line, std::string("unexpected character '") + c + "' in matrix");
        cur.pos = static_cast<size_t>(end - cur.s.c_str());
        row.push_back(v);
    }
    fail(cur.line, "unterminated matrix");
}

double column(const std::vector<double>& row, size_t idx, double fallback) {
    return idx < row.size() ? row[idx] : fallback;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

RawCase parse_raw_case(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw CaseFormatError("line 1: empty case file");
    std::string clean = strip_comments(text);
    RawCase raw;

    // function name
    {
        size_t f = clean.find("function");
        if (f != std::string::npos) {
            size_t eq = clean.find('=', f);
            if (eq != std::string::npos) {
                size_t b = eq + 1;
                while (b < clean.size() && std::isspace(static_cast<unsigned char>(clean[b]))) ++b;
                size_t e = b;
                while (e < clean.size() &&
                       (std::isalnum(static_cast<unsigned char>(clean[e])) || clean[e] == '_'))
                    ++e;
                raw.name = clean.substr(b, e - b);
            }
        }
    }

    bool saw_base = false;
    std::map<std::string, std::vector<std::vector<double>>*> tables{
        {"bus", &raw.bus_table},
        {"gen", &raw.gen_table},
        {"branch", &raw.branch_table},
        {"gencost", &raw.gencost_table},
    };

    size_t search = 0;
    while (true) {
        size_t at = clean.find("mpc.", search);
        if (at == std::string::npos) break;
        size_t name_end = at + 4;
        while (name_end < clean.size() &&
               (std::isalnum(static_cast<unsigned char>(clean[name_end])) || clean[name_end] == '_'))
            ++name_end;
        std::string field = clean.substr(at + 4, name_end - (at + 4));
        size_t eq = clean.find('=', name_end);
        if (eq == std::string::npos) break;

        Cursor cur{clean};
        cur.advance(eq + 1);

        if (field == "baseMVA") {
            cur.skip_ws();
            char* end = nullptr;
            raw.base_mva = std::strtod(clean.c_str() + cur.pos, &end);
            if (end == clean.c_str() + cur.pos) fail(cur.line, "bad baseMVA value");
            saw_base = true;
            search = static_cast<size_t>(end - clean.c_str());
        } else if (tables.count(field)) {
            *tables[field] = parse_matrix(cur);
            search = cur.pos;
        } else {
            search = eq + 1; // unknown field (version string, etc.)
        }
    }

    if (!saw_base) throw CaseFormatError("line 1: missing mpc.baseMVA");
    if (raw.base_mva <= 0.0) throw CaseFormatError("line 1: nonpositive base MVA");
    if (raw.bus_table.empty()) throw CaseFormatError("line 1: missing or empty mpc.bus");
    return raw;
}

NetworkCase to_network(const RawCase& raw) {
    NetworkCase net;
    net.name = raw.name;
    net.s_base = raw.base_mva;
    const double base = raw.base_mva;

    for (const auto& row : raw.bus_table) {
        if (row.size() < 13) throw CaseFormatError("bus row has fewer than 13 columns");
        Bus bus;
        bus.id = static_cast<int>(row[0]);
        int type = static_cast<int>(row[1]);
        bus.p_demand = row[2] / base;
        bus.q_demand = row[3] / base;
        bus.g_shunt = row[4] / base;
        bus.b_shunt = row[5] / base;
        bus.v_max = row[11];
        bus.v_min = row[12];
        net.buses.push_back(bus);
        if (type == 3) net.reference_buses.insert(bus.id);
    }

    for (size_t i = 0; i < raw.gen_table.size(); ++i) {
        const auto& row = raw.gen_table[i];
        if (row.size() < 10) throw CaseFormatError("gen row has fewer than 10 columns");
        if (column(row, 7, 1.0) <= 0.0) continue; // out of service
        Generator gen;
        gen.bus = static_cast<int>(row[0]);
        if (net.bus_index(gen.bus) < 0) {
            std::ostringstream os;
            os << "generator references unknown bus " << gen.bus;
            throw CaseFormatError(os.str());
        }
        gen.q_max = row[3] / base;
        gen.q_min = row[4] / base;
        gen.p_max = row[8] / base;
        gen.p_min = row[9] / base;
        if (i < raw.gencost_table.size()) {
            const auto& cost = raw.gencost_table[i];
            if (cost.size() < 4) throw CaseFormatError("gencost row has fewer than 4 columns");
            int model = static_cast<int>(cost[0]);
            if (model != 2)
                throw CaseFormatError("unsupported piecewise-linear cost (gencost model 1)");
            int n = static_cast<int>(cost[3]);
            if (static_cast<int>(cost.size()) < 4 + n)
                throw CaseFormatError("gencost row shorter than its declared coefficient count");
            std::vector<double> coeffs(cost.begin() + 4, cost.begin() + 4 + n);
            for (int k = 0; k + 3 < n; ++k)
                if (coeffs[k] != 0.0)
                    throw CaseFormatError("polynomial cost degree above 2 is unsupported");
            double c2 = n >= 3 ? coeffs[n - 3] : 0.0;
            double c1 = n >= 2 ? coeffs[n - 2] : 0.0;
            double c0 = n >= 1 ? coeffs[n - 1] : 0.0;
            gen.c2 = c2 * base * base; // cost over per-unit power
            gen.c1 = c1 * base;
            gen.c0 = c0;
        }
        net.generators.push_back(gen);
    }

    for (const auto& row : raw.branch_table) {
        if (row.size() < 11) throw CaseFormatError("branch row has fewer than 11 columns");
        if (column(row, 10, 1.0) <= 0.0) continue; // out of service
        Branch br;
        br.from_bus = static_cast<int>(row[0]);
        br.to_bus = static_cast<int>(row[1]);
        if (net.bus_index(br.from_bus) < 0 || net.bus_index(br.to_bus) < 0) {
            std::ostringstream os;
            os << "branch references unknown bus " << br.from_bus << " or " << br.to_bus;
            throw CaseFormatError(os.str());
        }
        double r = row[2], x = row[3];
        double zsq = r * r + x * x;
        if (zsq > 0.0) {
            br.g = r / zsq;
            br.b = -x / zsq;
        }
        br.b_charge = row[4];
        double rate_a = column(row, 5, 0.0);
        if (rate_a > 0.0) br.s_rating = rate_a / base;
        double ratio = column(row, 8, 0.0);
        br.tau = ratio > 0.0 ? ratio : 1.0;
        br.shift = column(row, 9, 0.0) * kDegToRad;
        double lo_deg = column(row, 11, 0.0);
        double hi_deg = column(row, 12, 0.0);
        bool unbounded = (lo_deg == 0.0 && hi_deg == 0.0);
        br.ang_min = (unbounded || lo_deg <= -360.0) ? -kAngleBoundClamp
                                                     : std::max(lo_deg * kDegToRad, -kAngleBoundClamp);
        br.ang_max = (unbounded || hi_deg >= 360.0) ? kAngleBoundClamp
                                                    : std::min(hi_deg * kDegToRad, kAngleBoundClamp);
        net.branches.push_back(br);
    }

    return net;
}

NetworkCase parse_case(const std::string& text) {
    return to_network(parse_raw_case(text));
}

std::string write_case(const NetworkCase& net) {
    const double base = net.s_base;
    std::ostringstream os;
    std::string name = net.name.empty() ? "exported_case" : net.name;
    os << "function mpc = " << name << "\n";
    os << "mpc.version = '2';\n";
    os << "mpc.baseMVA = " << fmt(base) << ";\n";

    std::set<int> gen_buses;
    for (const auto& gen : net.generators) gen_buses.insert(gen.bus);

    os << "mpc.bus = [\n";
    for (const auto& bus : net.buses) {
        int type = net.reference_buses.count(bus.id) ? 3 : (gen_buses.count(bus.id) ? 2 : 1);
        os << "\t" << bus.id << "\t" << type << "\t" << fmt(bus.p_demand * base) << "\t"
           << fmt(bus.q_demand * base) << "\t" << fmt(bus.g_shunt * base) << "\t"
           << fmt(bus.b_shunt * base) << "\t1\t1\t0\t1\t1\t" << fmt(bus.v_max) << "\t"
           << fmt(bus.v_min) << ";\n";
    }
    os << "];\n";

    os << "mpc.gen = [\n";
    for (const auto& gen : net.generators) {
        os << "\t" << gen.bus << "\t0\t0\t" << fmt(gen.q_max * base) << "\t"
           << fmt(gen.q_min * base) << "\t1\t" << fmt(base) << "\t1\t" << fmt(gen.p_max * base)
           << "\t" << fmt(gen.p_min * base) << ";\n";
    }
    os << "];\n";

    os << "mpc.gencost = [\n";
    for (const auto& gen : net.generators) {
        os << "\t2\t0\t0\t3\t" << fmt(gen.c2 / (base * base)) << "\t" << fmt(gen.c1 / base)
           << "\t" << fmt(gen.c0) << ";\n";
    }
    os << "];\n";

    os << "mpc.branch = [\n";
    for (const auto& br : net.branches) {
        double ysq = br.g * br.g + br.b * br.b;
        double r = ysq > 0.0 ? br.g / ysq : 0.0;
        double x = ysq > 0.0 ? -br.b / ysq : 0.0;
        double rate = br.s_rating ? *br.s_rating * base : 0.0;
        double ratio = br.tau == 1.0 ? 0.0 : br.tau;
        os << "\t" << br.from_bus << "\t" << br.to_bus << "\t" << fmt(r) << "\t" << fmt(x)
           << "\t" << fmt(br.b_charge) << "\t" << fmt(rate) << "\t0\t0\t" << fmt(ratio) << "\t"
           << fmt(br.shift / kDegToRad) << "\t1\t" << fmt(br.ang_min / kDegToRad) << "\t"
           << fmt(br.ang_max / kDegToRad) << ";\n";
    }
    os << "];\n";
    return os.str();
}

} // namespace ropf
