#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "liereduce/errors.hpp"
#include "liereduce/highorder.hpp"
#include "liereduce/numeric.hpp"
#include "liereduce/report.hpp"
#include "liereduce/sysfile.hpp"

using namespace liereduce;

namespace {

struct Outcome {
    Report report;
    int code = 0;
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<VectorField> fields_by_names(const SystemFile& sf, const std::string& csv) {
    std::vector<VectorField> out;
    for (const auto& name : split_csv(csv)) out.push_back(sf.field(name));
    if (out.empty()) throw Error("empty field list");
    return out;
}

InvolutionSystem involution_of(const SystemFile& sf, const std::string& gens_csv) {
    return build_involution(fields_by_names(sf, gens_csv));
}

std::vector<Expr> scalars_by_names(const SystemFile& sf, const std::string& csv) {
    std::vector<Expr> out;
    for (const auto& name : split_csv(csv)) out.push_back(sf.scalar(name));
    return out;
}

std::vector<std::string> expr_strs(const std::vector<Expr>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const Expr& e : v) out.push_back(e.str());
    return out;
}

// Witnesses for a failed group-reducibility check: the non-vanishing
// generator derivatives of the offending coefficients (or ratios).
std::vector<std::string> group_reduce_witnesses(const VectorField& f, const GroupData& G,
                                                bool orbital) {
    auto split = group_decompose(f, G);
    if (!split) return {"assembled columns are generically singular"};
    std::vector<Expr> targets;
    if (!orbital) {
        targets = split->betas;
    } else {
        std::size_t k = 0;
        while (k < split->betas.size() && split->betas[k].is_zero()) ++k;
        if (k == split->betas.size()) return {};
        for (std::size_t j = 0; j < split->betas.size(); ++j)
            if (j != k) targets.push_back(split->betas[j] / split->betas[k]);
    }
    std::vector<std::string> out;
    for (const Expr& t : targets)
        for (const auto& g : G.generators) {
            Expr w = lie_derivative(g, t);
            if (!w.is_zero()) out.push_back(w.str());
        }
    return out;
}

// ---------------------------------------------------------------------------
// corpus assertions

struct CheckContext {
    const SystemFile& sf;
    Report& report;
};

void run_check(CheckContext& cc, const std::string& raw) {
    const SystemFile& sf = cc.sf;
    Report& rep = cc.report;
    std::vector<std::string> t;
    {
        std::string cur;
        for (char c : raw + " ") {
            if (c == ' ' || c == '\t') {
                if (!cur.empty()) t.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
    }
    if (t.empty()) throw Error("empty check");
    auto expect_at = std::find(t.begin(), t.end(), "expect") - t.begin();
    auto tail_exprs = [&](std::size_t from) {
        std::string joined;
        for (std::size_t i = from; i < t.size(); ++i) joined += t[i];
        std::vector<std::string> parts;
        std::string cur;
        for (char c : joined + ";") {
            if (c == ';') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        while (!parts.empty() && parts.back().empty()) parts.pop_back();
        return parts;
    };
    auto pass = [&] { rep.notes.push_back("check " + raw + ": ok"); };
    auto flunk = [&](const std::string& w) { rep.fail("check " + raw + ": " + w); };

    const std::string& kind = t[0];
    if (kind == "symmetry") {
        bool ok = check_symmetry(sf.field(t[1]), sf.field(t[2]));
        bool want = t.at(expect_at + 1) == "ok";
        if (ok == want)
            pass();
        else
            flunk(lie_bracket(sf.field(t[2]), sf.field(t[1])).str());
    } else if (kind == "orbital") {
        auto alpha = check_orbital_symmetry(sf.field(t[1]), sf.field(t[2]));
        const std::string& want = t.at(expect_at + 1);
        if (want == "none") {
            if (!alpha)
                pass();
            else
                flunk("unexpected scalar " + alpha->str());
        } else if (alpha && *alpha == parse(want, sf.ctx)) {
            rep.alpha.push_back(alpha->str());
            pass();
        } else {
            flunk(alpha ? alpha->str() : "no scalar relation");
        }
    } else if (kind == "involution") {
        std::vector<VectorField> gens;
        for (std::size_t i = 1; i < static_cast<std::size_t>(expect_at); ++i)
            gens.push_back(sf.field(t[i]));
        try {
            auto S = build_involution(gens);
            rep.notes.push_back("involution rank: " + std::to_string(S.generic_rank));
            pass();
        } catch (const NotInInvolution& e) {
            flunk(e.what());
        }
    } else if (kind == "bracket") {
        VectorField b = lie_bracket(sf.field(t[1]), sf.field(t[2]));
        if (t.at(expect_at + 1) == "zero") {
            if (b.is_zero())
                pass();
            else
                flunk(b.str());
        } else if (t.at(expect_at + 1) == "scale") {
            Expr coeff = parse(t.at(expect_at + 2), sf.ctx);
            VectorField want = coeff * sf.field(t.at(expect_at + 3));
            if (b == want)
                pass();
            else
                flunk(b.str());
        } else {
            throw Error("unknown bracket expectation");
        }
    } else if (kind == "theta") {
        Expr want = parse(t.at(expect_at + 1), sf.ctx);
        Expr got = sf.group().theta;
        if (got == want)
            pass();
        else
            flunk(got.str());
    } else if (kind == "group-reduce") {
        bool orbital = std::find(t.begin(), t.end(), "orbital") != t.end();
        bool got = check_group_reducible(sf.field(t[1]), sf.group(), orbital);
        bool want = t.at(expect_at + 1) == "reducible";
        if (got == want) {
            if (!got)
                for (const auto& w : group_reduce_witnesses(sf.field(t[1]), sf.group(), orbital))
                    rep.notes.push_back("irreducibility witness: " + w);
            pass();
        } else {
            auto ws = group_reduce_witnesses(sf.field(t[1]), sf.group(), orbital);
            flunk(ws.empty() ? "reducibility mismatch" : ws.front());
        }
    } else if (kind == "group-decompose") {
        const VectorField& f = sf.field(t[1]);
        GroupData G = sf.group();
        auto split = group_decompose(f, G);
        if (!split) {
            flunk("assembled columns are generically singular");
            return;
        }
        VectorField acc = Expr::zero(sf.ctx) * f;
        for (std::size_t i = 0; i < split->alphas.size(); ++i)
            acc = acc + split->alphas[i] * G.generators[i];
        for (std::size_t j = 0; j < split->betas.size(); ++j)
            acc = acc + split->betas[j] * G.gradients[j];
        if (acc == f) {
            rep.alpha = expr_strs(split->alphas);
            rep.lambda.push_back(expr_strs(split->betas));
            pass();
        } else {
            flunk((acc - f).str());
        }
    } else if (kind == "reduce") {
        auto psi = sf.reduction_map();
        auto S = kernel_involution_from_map(psi);
        auto r = check_reducible(sf.field(t[1]), psi, S, sf.reduced);
        bool want = t.at(expect_at + 1) == "ok";
        if (r.reducible == want) {
            if (r.h_explicit) rep.reduced = expr_strs(r.h);
            pass();
        } else {
            flunk(r.witnesses.empty() ? "reducibility mismatch" : r.witnesses.front().str());
        }
    } else if (kind == "orbital-reduce") {
        auto psi = sf.reduction_map();
        auto S = kernel_involution_from_map(psi);
        std::optional<Expr> mu;
        std::size_t base = 2;
        if (t.at(base) == "mu") {
            mu = sf.scalar(t.at(base + 1));
            base += 2;
        }
        auto red = orbital_reduce(sf.field(t[1]), psi, S, mu);
        if (!red) {
            flunk("no rational closed form within the degree bound");
            return;
        }
        auto expected = tail_exprs(expect_at + 1);
        if (expected.size() != red->size()) {
            flunk("component count mismatch");
            return;
        }
        const CtxPtr wctx = red->front().ctx();
        for (std::size_t j = 0; j < red->size(); ++j)
            if (!((*red)[j] == parse(expected[j], wctx))) {
                flunk("component " + std::to_string(j + 1) + " is " + (*red)[j].str());
                return;
            }
        rep.reduced = expr_strs(*red);
        if (mu) rep.mu = mu->str();
        pass();
    } else if (kind == "construct") {
        bool orbital = t[2] == "orbital";
        auto S = involution_of(cc.sf, t[3]);
        auto coeffs = scalars_by_names(sf, t[4]);
        VectorField built = construct_reducible(sf.field(t[1]), S, coeffs, orbital);
        rep.notes.push_back("constructed: " + built.str());
        pass();
    } else if (kind == "equation" || kind == "build-higher") {
        // equation F GENS coeffs CSV phi TEXT expect TEXT
        // build-higher F GENS coeffs CSV phi TEXT [mu NAME] expect E1;E2
        auto S = involution_of(cc.sf, t[2]);
        if (t.at(3) != "coeffs" || t.at(5) != "phi") throw Error("malformed check: " + raw);
        auto coeffs = scalars_by_names(sf, t[4]);
        Expr phi = parse(t.at(6), sf.ctx);
        std::optional<ReductionMap> psi;
        if (!sf.invariants.empty()) psi = sf.reduction_map();
        std::optional<Expr> mu;
        if (t.at(7) == "mu") mu = sf.scalar(t.at(8));
        auto res = construct_higher_order(sf.field(t[1]), S, coeffs, phi, psi, mu);
        if (kind == "equation") {
            Expr want = parse(t.at(expect_at + 1), res.equation.ctx);
            if (res.equation.rhs == want)
                pass();
            else
                flunk("right-hand side is " + res.equation.rhs.str());
            return;
        }
        if (!res.reduced) {
            flunk("no reduced system produced");
            return;
        }
        auto expected = tail_exprs(expect_at + 1);
        const CtxPtr wctx = res.reduced->front().ctx();
        if (expected.size() != res.reduced->size()) {
            flunk("component count mismatch");
            return;
        }
        for (std::size_t j = 0; j < expected.size(); ++j)
            if (!((*res.reduced)[j] == parse(expected[j], wctx))) {
                flunk("component " + std::to_string(j + 1) + " is " + (*res.reduced)[j].str());
                return;
            }
        rep.reduced = expr_strs(*res.reduced);
        if (res.time_factor) rep.mu = res.time_factor->str();
        rep.notes.push_back("equation order " + std::to_string(res.equation.order) + ": " +
                            res.equation.rhs.str());
        pass();
    } else if (kind == "lambda") {
        // lambda F G NU phi TEXT expect TEXT
        const VectorField& f = sf.field(t[1]);
        const VectorField& g = sf.field(t[2]);
        Expr nu = sf.scalar(t[3]);
        if (t.at(4) != "phi") throw Error("malformed check: " + raw);
        Expr phi = parse(t.at(5), sf.ctx);
        VectorField extended = f + nu * g;
        VectorField H = (Expr::one(sf.ctx) / extended.components[0]) * extended;
        auto [eq, change] = raise_order(H, phi);
        Expr lam = compute_lambda(f, g, nu, change);
        Expr want = parse(t.at(expect_at + 1), eq.ctx);
        if (lam == want) {
            rep.lambda.push_back({lam.str()});
            pass();
        } else {
            flunk("scalar coefficient is " + lam.str());
        }
    } else if (kind == "raise") {
        if (t.at(2) != "phi") throw Error("malformed check: " + raw);
        auto [eq, change] = raise_order(sf.field(t[1]), parse(t.at(3), sf.ctx));
        Expr want = parse(t.at(expect_at + 1), eq.ctx);
        if (eq.rhs == want)
            pass();
        else
            flunk("right-hand side is " + eq.rhs.str());
    } else if (kind == "drift") {
        // drift F INTEGRAL below TOL
        double tol = std::stod(t.at(3) == "below" ? t.at(4) : t.at(3));
        CheckConfig cfg;
        double d = drift_first_integral(sf.field(t[1]), sf.integral(t[2]), sf.start, cfg,
                                        sf.impls);
        if (d < tol) {
            rep.notes.push_back("drift " + t[2] + " below " + t.at(4) + ": ok");
        } else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6e", d);
            flunk("drift " + t[2] + " = " + buf);
        }
    } else if (kind == "residual") {
        // residual F [mu NAME] below TOL
        if (!sf.reduced) throw Error("'residual' needs a reduced block");
        std::size_t base = 2;
        VectorField f = sf.field(t[1]);
        if (t.at(base) == "mu") {
            f = sf.scalar(t.at(base + 1)) * f;
            base += 2;
        }
        double tol = std::stod(t.at(base + 1));
        CheckConfig cfg;
        double r = residual_reduction(f, sf.reduction_map(), *sf.reduced, cfg, sf.impls);
        if (r < tol) {
            rep.notes.push_back("numeric residual below " + t.at(base + 1) + ": ok");
            if (!rep.residual_max || r > *rep.residual_max) rep.residual_max = r;
        } else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6e", r);
            flunk(std::string("numeric residual = ") + buf);
        }
    } else if (kind == "pzero-consistency") {
        // every formally zero reduction residual must also pass the sampler
        if (!sf.reduced) throw Error("'pzero-consistency' needs a reduced block");
        std::size_t base = 2;
        VectorField f = sf.field(t[1]);
        if (t.size() > base && t.at(base) == "mu") f = sf.scalar(t.at(base + 1)) * f;
        auto psi = sf.reduction_map();
        std::map<int, Expr> into;
        for (std::size_t k = 0; k < psi.invariants.size(); ++k)
            into.emplace(static_cast<int>(k), psi.invariants[k]);
        AtomImpls impls = sf.impls;
        impls.synthesize_missing = true;
        CheckConfig cfg;
        for (std::size_t j = 0; j < sf.reduced->size(); ++j) {
            Expr r = lie_derivative(f, psi.invariants[j]) -
                     transport((*sf.reduced)[j], sf.ctx, into);
            if (!r.is_zero()) {
                flunk("residual " + std::to_string(j + 1) + " is not a formal zero: " + r.str());
                return;
            }
            if (!probabilistic_zero(r, cfg, impls)) {
                flunk("formal zero rejected by sampling in slot " + std::to_string(j + 1));
                return;
            }
        }
        rep.notes.push_back("formal and sampled zero certificates agree");
        pass();
    } else {
        throw Error("unknown check '" + kind + "'");
    }
}

Report run_corpus_entry(const std::string& name, const SystemFile& sf) {
    Report rep;
    rep.command = "corpus run " + name;
    rep.residual_max = 0.0;
    rep.notes = sf.notes;
    CheckContext cc{sf, rep};
    for (const auto& check : sf.checks) {
        if (rep.status != "ok") break;
        try {
            run_check(cc, check);
        } catch (const InversionUnsupported&) {
            throw;
        } catch (const AnsatzExhausted&) {
            throw;
        } catch (const Error& e) {
            rep.fail("check " + check + ": " + e.what());
        }
    }
    return rep;
}

std::string corpus_dir() {
    if (const char* env = std::getenv("LIEREDUCE_CORPUS_DIR")) return env;
    return LIEREDUCE_DEFAULT_CORPUS_DIR;
}

// ---------------------------------------------------------------------------

int emit(const Outcome& o) {
    std::cout << o.report.to_json() << "\n";
    return o.code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic reducibility toolkit for autonomous ODE systems"};
    app.require_subcommand(1);

    std::string system_path, field_name, candidate_name, target_name, gens_csv, coeffs_csv;
    std::string mu_name, nu_name, phi_text, reduced_flag_name, corpus_verb, corpus_name;
    bool allow_f = false, orbital = false, use_reduced = false;
    int order = 2;
    std::optional<std::string> lambda_name;
    int points = 20;
    double tol = 0.0;
    std::uint64_t seed = 42;

    auto add_system = [&](CLI::App* cmd) {
        cmd->add_option("--system", system_path, "system definition file")->required();
    };

    std::function<Outcome()> runner;

    auto* c_sym = app.add_subcommand("check-symmetry", "is the candidate a symmetry of the field");
    add_system(c_sym);
    c_sym->add_option("--field", field_name)->required();
    c_sym->add_option("--candidate", candidate_name)->required();
    c_sym->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "check-symmetry";
            rep.residual_max = 0.0;
            VectorField b = lie_bracket(sf.field(candidate_name), sf.field(field_name));
            if (!b.is_zero()) rep.fail(b.str());
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_orb = app.add_subcommand("check-orbital-symmetry",
                                     "is the candidate an orbital symmetry of the field");
    add_system(c_orb);
    c_orb->add_option("--field", field_name)->required();
    c_orb->add_option("--candidate", candidate_name)->required();
    c_orb->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "check-orbital-symmetry";
            rep.residual_max = 0.0;
            auto alpha = check_orbital_symmetry(sf.field(field_name), sf.field(candidate_name));
            if (alpha)
                rep.alpha.push_back(alpha->str());
            else
                rep.fail(lie_bracket(sf.field(candidate_name), sf.field(field_name)).str());
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_inv = app.add_subcommand("check-involution", "do the fields close under the bracket");
    add_system(c_inv);
    c_inv->add_option("--fields", gens_csv, "comma-separated field names")->required();
    c_inv->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "check-involution";
            rep.residual_max = 0.0;
            try {
                auto S = involution_of(sf, gens_csv);
                rep.notes.push_back("rank: " + std::to_string(S.generic_rank));
            } catch (const NotInInvolution& e) {
                rep.fail(e.what());
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_dec = app.add_subcommand("decompose", "write a field over the module basis");
    add_system(c_dec);
    c_dec->add_option("--target", target_name)->required();
    c_dec->add_option("--fields", gens_csv)->required();
    c_dec->add_option("--field", field_name, "field to adjoin when --allow-f is set");
    c_dec->add_flag("--allow-f", allow_f, "adjoin the named field as an extra column");
    c_dec->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "decompose";
            rep.residual_max = 0.0;
            auto S = involution_of(sf, gens_csv);
            std::optional<VectorField> adjoin;
            if (allow_f) adjoin = sf.field(field_name);
            auto d = module_decompose(sf.field(target_name), S, adjoin);
            if (!d || !d->residual_zero) {
                rep.fail(sf.field(target_name).str());
            } else {
                rep.lambda.push_back(expr_strs(d->module_coefficients));
                if (d->f_coefficient) rep.mu = d->f_coefficient->str();
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_red = app.add_subcommand("check-reduce", "decide reducibility by the invariants");
    add_system(c_red);
    c_red->add_option("--field", field_name)->required();
    c_red->add_flag("--reduced", use_reduced, "verify against the file's reduced block");
    c_red->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "check-reduce";
            rep.residual_max = 0.0;
            auto psi = sf.reduction_map();
            auto S = kernel_involution_from_map(psi);
            std::optional<std::vector<Expr>> h;
            if (use_reduced) {
                if (!sf.reduced) throw Error("--reduced given but the file has no reduced block");
                h = sf.reduced;
            }
            auto r = check_reducible(sf.field(field_name), psi, S, h);
            if (r.trivial) rep.notes.push_back("field lies in the module itself");
            if (r.h_explicit) rep.reduced = expr_strs(r.h);
            if (!r.reducible)
                for (const Expr& w : r.witnesses) rep.fail(w.str());
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_ored = app.add_subcommand("orbital-reduce", "reduce up to time reparameterization");
    add_system(c_ored);
    c_ored->add_option("--field", field_name)->required();
    c_ored->add_option("--mu", mu_name, "scalar name for the known time factor");
    c_ored->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "orbital-reduce";
            rep.residual_max = 0.0;
            auto psi = sf.reduction_map();
            auto S = kernel_involution_from_map(psi);
            std::optional<Expr> mu;
            if (!mu_name.empty()) mu = sf.scalar(mu_name);
            try {
                auto red = orbital_reduce(sf.field(field_name), psi, S, mu);
                if (!red) {
                    rep.status = "unsupported";
                    rep.notes.push_back("no rational closed form within the degree bound");
                    return {rep, 3};
                }
                rep.reduced = expr_strs(*red);
                if (mu)
                    rep.mu = mu->str();
                else
                    rep.notes.push_back("first direction normalized to 1");
            } catch (const NotOrbitallyReducible& e) {
                rep.fail(e.witness);
            } catch (const DegenerateDirection& e) {
                rep.fail(e.what());
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_ker = app.add_subcommand("kernel-involution",
                                     "span the annihilator of the invariant map");
    add_system(c_ker);
    c_ker->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "kernel-involution";
            rep.residual_max = 0.0;
            auto S = kernel_involution_from_map(sf.reduction_map());
            rep.notes.push_back("rank: " + std::to_string(S.generic_rank));
            for (const auto& g : S.generators) rep.notes.push_back("generator: " + g.str());
            return {rep, 0};
        };
    });

    auto* c_gdec = app.add_subcommand("group-decompose", "split a field along group columns");
    add_system(c_gdec);
    c_gdec->add_option("--field", field_name)->required();
    c_gdec->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "group-decompose";
            rep.residual_max = 0.0;
            GroupData G = sf.group();
            rep.notes.push_back("theta: " + G.theta.str());
            auto split = group_decompose(sf.field(field_name), G);
            if (!split) {
                rep.fail("assembled columns are generically singular");
            } else {
                rep.alpha = expr_strs(split->alphas);
                rep.lambda.push_back(expr_strs(split->betas));
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_gred = app.add_subcommand("check-group-reduce",
                                      "decide reducibility by the group invariants");
    add_system(c_gred);
    c_gred->add_option("--field", field_name)->required();
    c_gred->add_flag("--orbital", orbital);
    c_gred->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "check-group-reduce";
            rep.residual_max = 0.0;
            GroupData G = sf.group();
            if (!check_group_reducible(sf.field(field_name), G, orbital)) {
                auto ws = group_reduce_witnesses(sf.field(field_name), G, orbital);
                if (ws.empty()) ws.push_back("coefficients are not invariant");
                for (const auto& w : ws) rep.fail(w);
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_con = app.add_subcommand("construct", "build a reducible field from symmetries");
    add_system(c_con);
    c_con->add_option("--field", field_name)->required();
    c_con->add_option("--gens", gens_csv, "comma-separated generator names")->required();
    c_con->add_option("--coeffs", coeffs_csv, "comma-separated scalar names")->required();
    c_con->add_flag("--orbital", orbital);
    c_con->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "construct";
            rep.residual_max = 0.0;
            auto S = involution_of(sf, gens_csv);
            VectorField built = construct_reducible(sf.field(field_name), S,
                                                    scalars_by_names(sf, coeffs_csv), orbital);
            rep.reduced = expr_strs(built.components);
            return {rep, 0};
        };
    });

    auto* c_pro = app.add_subcommand("prolong", "extend a plane action through the jet ladder");
    add_system(c_pro);
    c_pro->add_option("--g0", field_name, "scalar name: time component")->required();
    c_pro->add_option("--g1", candidate_name, "scalar name: base component")->required();
    std::string lambda_opt;
    c_pro->add_option("--lambda", lambda_opt, "scalar name: reparameterization coefficient");
    c_pro->add_option("--order", order)->required();
    c_pro->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "prolong";
            rep.residual_max = 0.0;
            std::pair<VectorField, Expr> r =
                lambda_opt.empty()
                    ? point_prolong(sf.scalar(field_name), sf.scalar(candidate_name), order)
                    : lambda_prolong(sf.scalar(field_name), sf.scalar(candidate_name),
                                     sf.scalar(lambda_opt), order);
            rep.reduced = expr_strs(r.first.components);
            rep.mu = r.second.str();
            return {rep, 0};
        };
    });

    auto* c_rai = app.add_subcommand("raise-order", "turn a companion system into one equation");
    add_system(c_rai);
    c_rai->add_option("--field", field_name)->required();
    c_rai->add_option("--phi", phi_text, "seed function (omit to search)");
    c_rai->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "raise-order";
            rep.residual_max = 0.0;
            try {
                auto describe = [&rep](const HigherOrderEq& eq, const CoordinateChange& change) {
                    rep.reduced = {eq.rhs.str()};
                    rep.notes.push_back("order: " + std::to_string(eq.order));
                    for (std::size_t k = 0; k < change.forward.size(); ++k)
                        rep.notes.push_back("forward[" + std::to_string(k) + "]: " +
                                            change.forward[k].str());
                    if (change.inverse)
                        for (std::size_t k = 0; k < change.inverse->size(); ++k)
                            rep.notes.push_back("inverse[" + std::to_string(k) + "]: " +
                                                (*change.inverse)[k].str());
                };
                if (phi_text.empty()) {
                    auto res = raise_order_auto(sf.field(field_name));
                    rep.notes.push_back("phi: " + res.phi.str());
                    describe(res.equation, res.change);
                } else {
                    auto res = raise_order(sf.field(field_name), parse(phi_text, sf.ctx));
                    describe(res.first, res.second);
                }
            } catch (const DependentDerivatives& e) {
                rep.fail(e.what());
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_bh = app.add_subcommand("build-higher",
                                    "construct a reducible higher-order equation");
    add_system(c_bh);
    c_bh->add_option("--field", field_name)->required();
    c_bh->add_option("--gens", gens_csv)->required();
    c_bh->add_option("--coeffs", coeffs_csv, "comma-separated scalar names")->required();
    c_bh->add_option("--phi", phi_text)->required();
    c_bh->add_option("--mu", mu_name, "scalar name for the orbital factor");
    c_bh->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "build-higher";
            rep.residual_max = 0.0;
            auto S = involution_of(sf, gens_csv);
            std::optional<ReductionMap> psi;
            if (!sf.invariants.empty()) psi = sf.reduction_map();
            std::optional<Expr> mu;
            if (!mu_name.empty()) mu = sf.scalar(mu_name);
            auto res = construct_higher_order(sf.field(field_name), S,
                                              scalars_by_names(sf, coeffs_csv),
                                              parse(phi_text, sf.ctx), psi, mu);
            rep.notes.push_back("extended: " + res.extended.str());
            rep.notes.push_back("equation order " + std::to_string(res.equation.order) + ": " +
                                res.equation.rhs.str());
            if (res.reduced) rep.reduced = expr_strs(*res.reduced);
            if (res.time_factor) rep.mu = res.time_factor->str();
            return {rep, 0};
        };
    });

    auto* c_lam = app.add_subcommand("compute-lambda",
                                     "scalar coefficient of a raised orbital symmetry");
    add_system(c_lam);
    c_lam->add_option("--field", field_name)->required();
    c_lam->add_option("--candidate", candidate_name)->required();
    c_lam->add_option("--scalar", nu_name)->required();
    c_lam->add_option("--phi", phi_text)->required();
    c_lam->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "compute-lambda";
            rep.residual_max = 0.0;
            const VectorField& f = sf.field(field_name);
            const VectorField& g = sf.field(candidate_name);
            Expr nu = sf.scalar(nu_name);
            VectorField extended = f + nu * g;
            VectorField H = (Expr::one(sf.ctx) / extended.components[0]) * extended;
            auto [eq, change] = raise_order(H, parse(phi_text, sf.ctx));
            rep.lambda.push_back({compute_lambda(f, g, nu, change).str()});
            return {rep, 0};
        };
    });

    auto* c_num = app.add_subcommand("verify-numeric", "floating-point cross checks");
    add_system(c_num);
    c_num->add_option("--field", field_name)->required();
    c_num->add_option("--mu", mu_name, "scalar name for the time factor");
    c_num->add_option("--points", points);
    c_num->add_option("--tol", tol, "overrides both tolerances");
    c_num->add_option("--seed", seed);
    c_num->callback([&] {
        runner = [&]() -> Outcome {
            SystemFile sf = parse_system_file(system_path);
            Report rep;
            rep.command = "verify-numeric";
            CheckConfig cfg;
            cfg.num_points = points;
            cfg.rng_seed = seed;
            if (tol > 0.0) cfg.tol_pointwise = cfg.tol_drift = tol;
            double worst = 0.0;
            bool ok = true;
            if (sf.reduced && !sf.invariants.empty()) {
                VectorField f = sf.field(field_name);
                if (!mu_name.empty()) f = sf.scalar(mu_name) * f;
                double r = residual_reduction(f, sf.reduction_map(), *sf.reduced, cfg, sf.impls);
                worst = std::max(worst, r);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6e", r);
                rep.notes.push_back(std::string("reduction residual: ") + buf);
                if (r >= cfg.tol_pointwise) ok = false;
            }
            for (const auto& def : sf.integrals) {
                const VectorField& traj =
                    sf.field(def.field.empty() ? field_name : def.field);
                double d = drift_first_integral(traj, def.rho, sf.start, cfg, sf.impls);
                worst = std::max(worst, d);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6e", d);
                rep.notes.push_back("drift " + def.name + ": " + buf);
                if (d >= cfg.tol_drift) ok = false;
            }
            rep.residual_max = worst;
            if (!ok) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6e", worst);
                rep.fail(std::string("numeric check above tolerance: ") + buf);
            }
            return {rep, rep.status == "ok" ? 0 : 1};
        };
    });

    auto* c_cor = app.add_subcommand("corpus", "run the bundled example corpus");
    c_cor->add_option("verb", corpus_verb)->required();
    c_cor->add_option("name", corpus_name, "entry name (omit for all)");
    c_cor->callback([&] {
        runner = [&]() -> Outcome {
            if (corpus_verb != "run") throw Error("unknown corpus verb '" + corpus_verb + "'");
            namespace fs = std::filesystem;
            std::vector<std::string> names;
            for (const auto& entry : fs::directory_iterator(corpus_dir()))
                if (entry.path().extension() == ".sys") names.push_back(entry.path().stem());
            std::sort(names.begin(), names.end());
            if (!corpus_name.empty()) {
                if (std::find(names.begin(), names.end(), corpus_name) == names.end())
                    throw Error("no corpus entry named '" + corpus_name + "'");
                names = {corpus_name};
            }
            if (names.empty()) throw Error("no corpus entries found in " + corpus_dir());
            std::vector<Report> reports;
            int code = 0;
            for (const auto& n : names) {
                SystemFile sf = parse_system_file(corpus_dir() + "/" + n + ".sys");
                Report r = run_corpus_entry(n, sf);
                if (r.status != "ok") code = std::max(code, 1);
                reports.push_back(std::move(r));
            }
            if (reports.size() == 1) return Outcome{reports.front(), code};
            std::cout << reports_to_json(reports) << "\n";
            std::exit(code);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return emit(runner());
    } catch (const InversionUnsupported& e) {
        Report rep;
        rep.command = app.get_subcommands().front()->get_name();
        rep.status = "unsupported";
        rep.notes.push_back(e.what());
        std::cout << rep.to_json() << "\n";
        return 3;
    } catch (const AnsatzExhausted& e) {
        Report rep;
        rep.command = app.get_subcommands().front()->get_name();
        rep.status = "unsupported";
        rep.notes.push_back(e.what());
        std::cout << rep.to_json() << "\n";
        return 3;
    } catch (const SamplingExhausted& e) {
        Report rep;
        rep.command = app.get_subcommands().front()->get_name();
        rep.status = "unsupported";
        rep.notes.push_back(e.what());
        std::cout << rep.to_json() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
