#include "liereduce/sysfile.hpp"

#include <fstream>
#include <sstream>

#include "liereduce/errors.hpp"

namespace liereduce {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Splits on commas at parenthesis depth zero, so multi-argument function
// atoms survive.
std::vector<std::string> split_components(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct LineError : Error {
    LineError(const std::string& origin, int line, const std::string& msg)
        : Error(origin + ":" + std::to_string(line) + ": " + msg) {}
};

} // namespace

const VectorField& SystemFile::field(const std::string& name) const {
    for (const auto& [n, f] : fields)
        if (n == name) return f;
    for (const auto& [n, f] : group_generators)
        if (n == name) return f;
    throw Error("no field named '" + name + "' in the system file");
}

Expr SystemFile::scalar(const std::string& name) const {
    for (const auto& [n, e] : scalars)
        if (n == name) return e;
    throw Error("no scalar named '" + name + "' in the system file");
}

Expr SystemFile::integral(const std::string& name) const {
    for (const auto& def : integrals)
        if (def.name == name) return def.rho;
    throw Error("no integral named '" + name + "' in the system file");
}

ReductionMap SystemFile::reduction_map() const {
    if (invariants.empty()) throw Error("system file declares no invariants");
    std::vector<int> vars;
    for (const auto& name : var_names) vars.push_back(*ctx->find_symbol(name));
    std::vector<Expr> invs;
    for (const auto& [n, e] : invariants) invs.push_back(e);
    return ReductionMap::from_exprs(ctx, std::move(vars), std::move(invs));
}

GroupData SystemFile::group() const {
    if (group_generators.empty()) throw Error("system file declares no group generators");
    std::vector<VectorField> gens;
    for (const auto& [n, g] : group_generators) gens.push_back(g);
    std::vector<Expr> invs;
    for (const auto& [n, e] : group_invariants) invs.push_back(e);
    if (group_columns.empty()) return GroupData::make(std::move(gens), std::move(invs));
    std::vector<VectorField> cols;
    for (const auto& [n, c] : group_columns) cols.push_back(c);
    return GroupData::make(std::move(gens), std::move(invs), std::move(cols));
}

SystemFile parse_system_text(const std::string& text, const std::string& origin) {
    SystemFile sf;
    std::vector<std::pair<std::string, int>> functions;

    auto ensure_ctx = [&](int line) -> const CtxPtr& {
        if (!sf.ctx) {
            if (sf.var_names.empty()) throw LineError(origin, line, "no 'vars:' line seen yet");
            std::vector<std::string> names = sf.var_names;
            names.insert(names.end(), sf.param_names.begin(), sf.param_names.end());
            sf.ctx = Context::make(names);
            for (const auto& [fname, arity] : functions) sf.ctx->declare_function(fname, arity);
        }
        return sf.ctx;
    };
    auto parse_field = [&](const std::string& body, int line) {
        const CtxPtr& ctx = ensure_ctx(line);
        std::vector<std::string> comps = split_components(body);
        if (comps.size() != sf.var_names.size())
            throw LineError(origin, line, "field needs one component per coordinate");
        return VectorField::make(ctx, sf.var_names, comps);
    };

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string s = trim(raw);
        if (s.empty()) continue;

        try {
            if (s.rfind("vars:", 0) == 0) {
                if (sf.ctx) throw LineError(origin, line, "'vars:' after expressions were read");
                sf.var_names = split_ws(s.substr(5));
                if (sf.var_names.empty()) throw LineError(origin, line, "empty variable list");
            } else if (s.rfind("params:", 0) == 0) {
                if (sf.ctx) throw LineError(origin, line, "'params:' after expressions were read");
                for (auto& p : split_ws(s.substr(7))) sf.param_names.push_back(p);
            } else if (s.rfind("function ", 0) == 0) {
                auto toks = split_ws(s.substr(9));
                if (toks.size() != 2) throw LineError(origin, line, "expected: function NAME ARITY");
                int arity = std::stoi(toks[1]);
                functions.emplace_back(toks[0], arity);
                if (sf.ctx) sf.ctx->declare_function(toks[0], arity);
            } else if (s.rfind("field ", 0) == 0) {
                std::size_t colon = s.find(':');
                if (colon == std::string::npos) throw LineError(origin, line, "missing ':'");
                std::string name = trim(s.substr(6, colon - 6));
                sf.fields.emplace_back(name, parse_field(s.substr(colon + 1), line));
            } else if (s.rfind("invariant ", 0) == 0) {
                std::size_t colon = s.find(':');
                if (colon == std::string::npos) throw LineError(origin, line, "missing ':'");
                std::string name = trim(s.substr(10, colon - 10));
                sf.invariants.emplace_back(name, parse(trim(s.substr(colon + 1)), ensure_ctx(line)));
            } else if (s.rfind("scalar ", 0) == 0) {
                std::size_t colon = s.find(':');
                if (colon == std::string::npos) throw LineError(origin, line, "missing ':'");
                std::string name = trim(s.substr(7, colon - 7));
                sf.scalars.emplace_back(name, parse(trim(s.substr(colon + 1)), ensure_ctx(line)));
            } else if (s.rfind("reduced ", 0) == 0) {
                std::size_t colon = s.find(':');
                if (colon == std::string::npos) throw LineError(origin, line, "missing ':'");
                if (sf.invariants.empty())
                    throw LineError(origin, line, "'reduced' needs invariant lines first");
                ensure_ctx(line);
                std::vector<std::string> wnames;
                for (std::size_t k = 1; k <= sf.invariants.size(); ++k)
                    wnames.push_back("w" + std::to_string(k));
                sf.reduced_ctx = Context::make(wnames);
                for (const auto& [fname, arity] : functions)
                    sf.reduced_ctx->declare_function(fname, arity);
                std::vector<Expr> entries;
                for (const auto& comp : split_components(s.substr(colon + 1)))
                    entries.push_back(parse(comp, sf.reduced_ctx));
                sf.reduced = std::move(entries);
            } else if (s.rfind("impl ", 0) == 0) {
                auto toks = split_ws(s.substr(5));
                if (toks.size() != 2) throw LineError(origin, line, "expected: impl NAME BUILTIN");
                sf.impls.set(toks[0], AtomImpls::builtin(toks[1]));
            } else if (s.rfind("start:", 0) == 0) {
                for (const auto& tok : split_ws(s.substr(6))) sf.start.push_back(std::stod(tok));
            } else if (s.rfind("integral ", 0) == 0) {
                std::size_t colon = s.find(':');
                if (colon == std::string::npos) throw LineError(origin, line, "missing ':'");
                auto head = split_ws(s.substr(9, colon - 9));
                IntegralDef def;
                if (head.size() == 1) {
                    def.name = head[0];
                } else if (head.size() == 3 && head[1] == "along") {
                    def.name = head[0];
                    def.field = head[2];
                } else {
                    throw LineError(origin, line, "expected: integral NAME [along FIELD]: ...");
                }
                def.rho = parse(trim(s.substr(colon + 1)), ensure_ctx(line));
                sf.integrals.push_back(std::move(def));
            } else if (s.rfind("group ", 0) == 0) {
                std::string rest = trim(s.substr(6));
                std::size_t colon = rest.find(':');
                if (colon == std::string::npos) throw LineError(origin, line, "missing ':'");
                auto head = split_ws(rest.substr(0, colon));
                if (head.size() != 2)
                    throw LineError(origin, line, "expected: group gen|inv|col NAME: ...");
                std::string body = rest.substr(colon + 1);
                if (head[0] == "gen")
                    sf.group_generators.emplace_back(head[1], parse_field(body, line));
                else if (head[0] == "col")
                    sf.group_columns.emplace_back(head[1], parse_field(body, line));
                else if (head[0] == "inv")
                    sf.group_invariants.emplace_back(head[1], parse(trim(body), ensure_ctx(line)));
                else
                    throw LineError(origin, line, "unknown group item '" + head[0] + "'");
            } else if (s.rfind("check ", 0) == 0) {
                sf.checks.push_back(trim(s.substr(6)));
            } else if (s.rfind("note ", 0) == 0) {
                sf.notes.push_back(trim(s.substr(5)));
            } else {
                throw LineError(origin, line, "unknown directive");
            }
        } catch (const LineError&) {
            throw;
        } catch (const Error& e) {
            throw LineError(origin, line, e.what());
        } catch (const std::exception& e) {
            throw LineError(origin, line, e.what());
        }
    }
    if (!sf.var_names.empty()) ensure_ctx(line);
    return sf;
}

SystemFile parse_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open system file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str(), path);
}

} // namespace liereduce
