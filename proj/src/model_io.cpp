#include <cstdio>
#include <cstring>
#include <sstream>

#include "ordmeas/model.hpp"

namespace ordmeas {

namespace {

const char* kHeader = "ordmeas-model 1";

std::string fmt(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(const std::string& tok, int line) {
    if (tok == "inf") return kInf;
    if (tok == "-inf") return -kInf;
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::logic_error&) {
        throw ModelError("parse error at line " + std::to_string(line) +
                         ": bad number '" + tok + "'");
    }
}

int parse_int(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::logic_error&) {
        throw ModelError("parse error at line " + std::to_string(line) +
                         ": bad integer '" + tok + "'");
    }
}

// Variable and constraint names are emitted with URL-ish escaping so the
// format stays strictly whitespace-delimited.
std::string escape(const std::string& s) {
    if (s.empty()) return "-";
    std::string out;
    for (char c : s) {
        if (c == ' ' || c == '%' || c == '\n' || c == '\t') {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape(const std::string& s) {
    if (s == "-") return {};
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out += static_cast<char>(std::strtol(s.substr(i + 1, 2).c_str(), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

std::string serialize(const Model& model) {
    std::ostringstream out;
    out << kHeader << "\n";
    out << (model.objective().sense == ObjSense::Minimize ? "minimize" : "maximize") << "\n";

    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const Variable& v = model.variables()[i];
        out << "var " << i << ' ' << fmt(v.lower) << ' ' << fmt(v.upper) << ' '
            << (v.kind == VarKind::Binary ? "bin" : "cont") << ' ' << escape(v.name) << "\n";
    }
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
        const Constraint& c = model.constraints()[i];
        const char* sense = c.sense == Sense::LessEqual      ? "le"
                            : c.sense == Sense::Equal        ? "eq"
                                                             : "ge";
        out << "con " << sense << ' ' << fmt(c.rhs) << ' ' << c.expr.terms().size();
        for (const auto& [v, coef] : c.expr.terms()) out << ' ' << v << ':' << fmt(coef);
        out << ' ' << escape(c.name) << "\n";
    }
    for (const auto& set : model.sos1_sets()) {
        out << "sos1 " << set.members.size();
        for (VarId v : set.members) out << ' ' << v;
        out << "\n";
    }
    out << "obj const " << fmt(model.objective().linear.constant()) << "\n";
    for (const auto& [v, coef] : model.objective().linear.terms())
        out << "obj lin " << v << ' ' << fmt(coef) << "\n";
    for (const auto& [key, coef] : model.objective().quadratic)
        out << "obj quad " << key.first << ' ' << key.second << ' ' << fmt(coef) << "\n";
    out << "end\n";
    return out.str();
}

Model parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Model model;
    bool saw_header = false, saw_sense = false, saw_end = false;

    auto fail = [&](const std::string& why) {
        throw ModelError("parse error at line " + std::to_string(lineno) + ": " + why);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (saw_end) fail("content after end marker");
        std::istringstream ls(line);
        std::string word;
        ls >> word;

        if (!saw_header) {
            if (line != kHeader) fail("missing header '" + std::string(kHeader) + "'");
            saw_header = true;
            continue;
        }
        if (!saw_sense) {
            if (word == "minimize")
                model.objective().sense = ObjSense::Minimize;
            else if (word == "maximize")
                model.objective().sense = ObjSense::Maximize;
            else
                fail("expected minimize or maximize");
            saw_sense = true;
            continue;
        }

        if (word == "var") {
            std::string idx, lo, hi, kind, name;
            if (!(ls >> idx >> lo >> hi >> kind >> name)) fail("truncated var line");
            int id = parse_int(idx, lineno);
            if (id != static_cast<int>(model.num_variables()))
                fail("variable ids must be consecutive");
            if (kind != "bin" && kind != "cont") fail("variable kind must be bin or cont");
            try {
                model.add_variable(parse_number(lo, lineno), parse_number(hi, lineno),
                                   kind == "bin" ? VarKind::Binary : VarKind::Continuous,
                                   unescape(name));
            } catch (const ModelError& e) {
                fail(e.what());
            }
        } else if (word == "con") {
            std::string sense_tok, rhs_tok, count_tok;
            if (!(ls >> sense_tok >> rhs_tok >> count_tok)) fail("truncated con line");
            Sense sense;
            if (sense_tok == "le")
                sense = Sense::LessEqual;
            else if (sense_tok == "eq")
                sense = Sense::Equal;
            else if (sense_tok == "ge")
                sense = Sense::GreaterEqual;
            else {
                fail("constraint sense must be le, eq, or ge");
                return model;  // unreachable
            }
            int count = parse_int(count_tok, lineno);
            LinearExpression expr;
            for (int t = 0; t < count; ++t) {
                std::string term;
                if (!(ls >> term)) fail("truncated con line: missing terms");
                auto colon = term.find(':');
                if (colon == std::string::npos) fail("constraint term needs var:coef");
                expr.add_term(parse_int(term.substr(0, colon), lineno),
                              parse_number(term.substr(colon + 1), lineno));
            }
            std::string name;
            if (!(ls >> name)) fail("truncated con line: missing name");
            try {
                model.add_constraint(std::move(expr), sense, parse_number(rhs_tok, lineno),
                                     unescape(name));
            } catch (const ModelError& e) {
                fail(e.what());
            }
        } else if (word == "sos1") {
            std::string count_tok;
            if (!(ls >> count_tok)) fail("truncated sos1 line");
            int count = parse_int(count_tok, lineno);
            std::vector<VarId> members;
            for (int t = 0; t < count; ++t) {
                std::string idx;
                if (!(ls >> idx)) fail("truncated sos1 line: missing members");
                members.push_back(parse_int(idx, lineno));
            }
            try {
                model.add_sos1(std::move(members));
            } catch (const ModelError& e) {
                fail(e.what());
            }
        } else if (word == "obj") {
            std::string what;
            if (!(ls >> what)) fail("truncated obj line");
            if (what == "const") {
                std::string v;
                if (!(ls >> v)) fail("truncated obj const line");
                model.objective().linear.add_constant(parse_number(v, lineno));
            } else if (what == "lin") {
                std::string idx, coef;
                if (!(ls >> idx >> coef)) fail("truncated obj lin line");
                int id = parse_int(idx, lineno);
                model.check_var(id);
                model.objective().linear.add_term(id, parse_number(coef, lineno));
            } else if (what == "quad") {
                std::string a, b, coef;
                if (!(ls >> a >> b >> coef)) fail("truncated obj quad line");
                int ia = parse_int(a, lineno), ib = parse_int(b, lineno);
                model.check_var(ia);
                model.check_var(ib);
                model.objective().add_quadratic_term(ia, ib, parse_number(coef, lineno));
            } else {
                fail("obj line must be const, lin, or quad");
            }
        } else if (word == "end") {
            saw_end = true;
        } else {
            fail("unknown directive '" + word + "'");
        }
    }
    if (!saw_header) {
        lineno = 1;
        throw ModelError("parse error at line 1: empty document");
    }
    if (!saw_end) fail("missing end marker (truncated file)");
    return model;
}

std::string to_mps(const Model& model, const std::string& name) {
    std::ostringstream out;
    auto var_name = [&](VarId v) {
        const std::string& n = model.variable(v).name;
        return "X" + std::to_string(v) + (n.empty() ? "" : "_" + n);
    };
    auto row_name = [&](int i) { return "R" + std::to_string(i); };

    out << "NAME " << name << "\n";
    out << "OBJSENSE\n " << (model.objective().sense == ObjSense::Minimize ? "MIN" : "MAX")
        << "\n";
    out << "ROWS\n N OBJ\n";
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
        char s = model.constraints()[i].sense == Sense::LessEqual      ? 'L'
                 : model.constraints()[i].sense == Sense::Equal        ? 'E'
                                                                       : 'G';
        out << ' ' << s << ' ' << row_name(static_cast<int>(i)) << "\n";
    }

    // Column-major scan of constraint coefficients.
    std::vector<std::vector<std::pair<int, double>>> cols(model.num_variables());
    for (std::size_t i = 0; i < model.num_constraints(); ++i)
        for (const auto& [v, c] : model.constraints()[i].expr.terms())
            cols[static_cast<std::size_t>(v)].push_back({static_cast<int>(i), c});

    out << "COLUMNS\n";
    bool in_int = false;
    for (std::size_t v = 0; v < model.num_variables(); ++v) {
        bool is_int = model.variables()[v].kind == VarKind::Binary;
        if (is_int != in_int) {
            out << " MARKER M" << v << " 'MARKER' "
                << (is_int ? "'INTORG'" : "'INTEND'") << "\n";
            in_int = is_int;
        }
        double obj_coef = 0.0;
        auto it = model.objective().linear.terms().find(static_cast<VarId>(v));
        if (it != model.objective().linear.terms().end()) obj_coef = it->second;
        if (obj_coef != 0.0)
            out << ' ' << var_name(static_cast<VarId>(v)) << " OBJ " << fmt(obj_coef) << "\n";
        for (const auto& [row, coef] : cols[v])
            out << ' ' << var_name(static_cast<VarId>(v)) << ' ' << row_name(row) << ' '
                << fmt(coef) << "\n";
        if (obj_coef == 0.0 && cols[v].empty())
            out << ' ' << var_name(static_cast<VarId>(v)) << " OBJ 0\n";
    }
    if (in_int) out << " MARKER MEND 'MARKER' 'INTEND'\n";

    out << "RHS\n";
    if (model.objective().linear.constant() != 0.0)
        out << " RHS OBJ " << fmt(-model.objective().linear.constant()) << "\n";
    for (std::size_t i = 0; i < model.num_constraints(); ++i)
        out << " RHS " << row_name(static_cast<int>(i)) << ' '
            << fmt(model.constraints()[i].rhs) << "\n";

    out << "BOUNDS\n";
    for (std::size_t v = 0; v < model.num_variables(); ++v) {
        const Variable& var = model.variables()[v];
        const std::string vn = var_name(static_cast<VarId>(v));
        if (var.lower == -kInf && var.upper == kInf) {
            out << " FR BND " << vn << "\n";
            continue;
        }
        if (var.lower == -kInf)
            out << " MI BND " << vn << "\n";
        else
            out << " LO BND " << vn << ' ' << fmt(var.lower) << "\n";
        if (var.upper == kInf)
            out << " PL BND " << vn << "\n";
        else
            out << " UP BND " << vn << ' ' << fmt(var.upper) << "\n";
    }

    if (!model.sos1_sets().empty()) {
        out << "SOS\n";
        int set_idx = 0;
        for (const auto& set : model.sos1_sets()) {
            out << " S1 SOS S" << set_idx++ << "\n";
            int weight = 1;
            for (VarId v : set.members)
                out << "  " << var_name(v) << ' ' << weight++ << "\n";
        }
    }

    if (model.objective().is_quadratic()) {
        // QUADOBJ stores 0.5 * x'Qx; emit Q entries accordingly.
        out << "QUADOBJ\n";
        for (const auto& [key, coef] : model.objective().quadratic) {
            double q = key.first == key.second ? 2.0 * coef : coef;
            out << ' ' << var_name(key.first) << ' ' << var_name(key.second) << ' ' << fmt(q)
                << "\n";
        }
    }
    out << "ENDATA\n";
    return out.str();
}

}  // namespace ordmeas
