// mse: build, evaluate, translate and check metric set models.
// Exit codes: 0 pass, 1 check failed, 2 usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mse/syntax.hpp"
#include "mse/translation.hpp"
#include "mse/tree_models.hpp"
#include "mse/verification.hpp"

using namespace mse;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    out << text << "\n";
}

// "empty", or {"size": n, "d": [...]} with n*n rational strings
FinMetric load_atoms(const std::string& spec) {
    if (spec == "empty") return FinMetric(0);
    json j = json::parse(read_file(spec));
    const std::size_t n = j.at("size").get<std::size_t>();
    std::vector<Rational> d;
    for (const auto& v : j.at("d")) d.push_back(Rational::parse(v.get<std::string>()));
    if (d.size() != n * n) throw UsageError("atom file: expected size*size distances");
    FinMetric q(n, d);
    if (!metric_defect(q).is_zero()) throw UsageError("atom file: not a metric");
    return q;
}

struct Model {
    LoadedModel loaded;
    std::optional<Gauge> gauge;
    const LeStructure& le() {
        if (!loaded.le) loaded.le = std::make_unique<LeStructure>(induced_le(*loaded.mss));
        return *loaded.le;
    }
};

Model load_model(const std::string& path) {
    const std::string text = read_file(path);
    Model m{model_from_json(text), std::nullopt};
    json j = json::parse(text);
    if (j.contains("gauge")) m.gauge = parse_gauge(j["gauge"].get<std::string>());
    return m;
}

// "x=0,y=3"
Assignment parse_assignment(const std::string& text) {
    Assignment a;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("assignment entries look like x=3");
        a[item.substr(0, eq)] = std::stoul(item.substr(eq + 1));
    }
    return a;
}

IndexSet parse_indices(const std::string& text) {
    IndexSet out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoul(item));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> load_corpus(const std::string& path) {
    if (path.empty()) return certificate_corpus();
    std::vector<std::string> out;
    std::stringstream ss(read_file(path));
    std::string line;
    while (std::getline(ss, line)) {
        const auto a = line.find_first_not_of(" \t");
        if (a == std::string::npos || line[a] == '#') continue;
        out.push_back(line.substr(a, line.find_last_not_of(" \t\r") + 1 - a));
    }
    return out;
}

// "schema:NAME" or "schema:NAME:R" picks a named formula
RF formula_arg(const std::string& lang, const std::string& text) {
    if (text.rfind("schema:", 0) == 0) {
        std::string rest = text.substr(7);
        Rational r(1);
        if (auto c = rest.find(':'); c != std::string::npos) {
            r = Rational::parse(rest.substr(c + 1));
            rest = rest.substr(0, c);
        }
        RF f = schema(rest, r);
        return lang == "e" ? to_e(f) : f;
    }
    return lang == "sq" ? parse_sq(text) : parse_e(text);
}

std::string certificate_text(const AxiomReport& r) {
    std::ostringstream os;
    os << "eps " << r.eps.str() << "\n";
    os << "hext_defect " << r.hext_defect.str() << (r.hext_defect <= r.eps ? " ok" : " FAIL") << "\n";
    for (const auto& row : r.excision)
        os << "excision " << row.value.str() << " <= " << row.bound.str() << " " << row.mode
           << (row.value <= row.bound ? " ok" : " FAIL") << " : " << row.formula << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------

struct Options {
    std::uint64_t cap = kDefaultCap;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_build(const Options& o, const std::string& atoms, std::size_t height, const std::string& gauge_spec,
              const std::string& corpus) {
    const Gauge g = parse_gauge(gauge_spec);
    if (g.height() != height)
        throw UsageError("gauge has height " + std::to_string(g.height()) + ", expected " + std::to_string(height));
    const FinMetric q = load_atoms(atoms);
    QuotientModel m = quotient_model(q, height, g, o.cap);
    std::cout << "gauge " << gauge_text(g) << "\n";
    std::cout << "top_rank " << m.top_rank() << "\n";
    bool pass = true;
    if (q.size() > 0) {
        QuineReport r = m.quine_atoms_check();
        std::cout << "quine_atoms " << (r.pass ? "ok" : "FAIL") << " (" << (r.enumerated ? "enumerated" : "lazy")
                  << ")\n";
        for (const auto& p : r.pairs)
            std::cout << "  d(" << p.a << "," << p.b << ") " << p.d.str() << " d_e " << p.d_e.str() << "\n";
        pass = r.pass;
    }
    if (!m.enumerated()) {
        std::cout << "classes too many to list; no model file\n";
        return pass ? 0 : 1;
    }
    std::cout << "classes " << m.size() << "\n";
    constexpr std::size_t kFileLimit = 4096;
    if (m.size() > kFileLimit) {
        std::cout << "no certificate above " << kFileLimit << " classes\n";
        return pass ? 0 : 1;
    }
    LeStructure le = m.le(kFileLimit);
    AxiomReport rep = certify(le, g, load_corpus(corpus), o.seed);
    std::cout << certificate_text(rep);
    pass = pass && rep.pass;
    if (!o.out.empty()) {
        json j = json::parse(to_json(le));
        j["gauge"] = gauge_text(g);
        json labels = json::array();
        for (std::size_t i = 0; i < m.size(); ++i) labels.push_back(m.class_label(i));
        j["labels"] = labels;
        write_file(o.out, j.dump());
        write_file(o.out + ".cert.json", certificate_json(rep, g));
        std::cout << "wrote " << o.out << " and " << o.out << ".cert.json\n";
    }
    std::cout << (pass ? "pass" : "fail") << "\n";
    return pass ? 0 : 1;
}

int cmd_eval(const std::string& path, const std::string& lang, const std::string& text, const std::string& assign) {
    Model m = load_model(path);
    Assignment a = parse_assignment(assign);
    Rational v;
    if (lang == "luk") {
        v = eval_luk(parse_luk(text), m.le(), a);
    } else if (lang == "e") {
        v = eval_e(formula_arg("e", text), m.le(), a);
    } else if (lang == "sq") {
        RF f = formula_arg("sq", text);
        if (m.loaded.mss) {
            v = eval_sq(f, *m.loaded.mss, a);
        } else {
            Completion c = completion(m.le());
            for (auto& [k, x] : a) x = c.class_of.at(x);
            v = eval_sq(f, c.structure, a);
        }
    } else {
        throw UsageError("language is one of sq, e, luk");
    }
    std::cout << v.str() << "\n";
    return 0;
}

int cmd_translate(const std::string& from, const std::string& to, const std::string& text) {
    if (from == "sq" && to == "e") {
        std::cout << to_text(to_e(formula_arg("sq", text))) << "\n";
    } else if (from == "e" && to == "sq") {
        std::cout << to_text(to_sq(formula_arg("e", text))) << "\n";
    } else if (from == "e" && to == "anf") {
        std::cout << anf_to_text(prenex_max_anf(formula_arg("e", text))) << "\n";
    } else if (from == "e" && to == "luk") {
        LukCondition c = to_luk_condition(formula_arg("e", text));
        std::cout << to_text(c.psi) << "\n";
        std::cout << "# ell " << c.ell << " scale " << c.scale << "\n";
    } else if (from == "luk" && to == "pure") {
        std::cout << to_text(expand(parse_luk(text))) << "\n";
    } else {
        throw UsageError("translations: sq e, e sq, e anf, e luk, luk pure");
    }
    return 0;
}

void spectrum_table(const MetricSetStructure& m) {
    std::cout << "spectrum\n";
    auto rows = chain_report(m);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::cout << "  " << i << " members " << m.ext(i).size() << " chn " << rows[i].chn.str() << " chain "
                  << rows[i].chain << " well_ordered " << rows[i].well_ordered << " dis " << rows[i].dis.str()
                  << "\n";
}

int cmd_check(const Options& o, const std::string& path, const std::string& corpus, const std::string& gauge) {
    Model m = load_model(path);
    Rational eps(0);
    if (!gauge.empty()) m.gauge = parse_gauge(gauge);
    if (m.gauge) eps = m.gauge->eps;
    const LeStructure& le = m.le();
    std::cout << "model " << (m.loaded.mss ? "mss" : "le") << " " << le.size() << "\n";
    AxiomReport rep = certify(le, eps, load_corpus(corpus), o.seed);
    std::cout << certificate_text(rep);
    bool pass = rep.pass;
    if (m.loaded.mss) {
        // the L_e reading cannot see the metric; compare it with the extensions directly
        const Rational& h = m.loaded.mss->hext_defect();
        std::cout << "metric_hext_defect " << h.str() << (h <= eps ? " ok" : " FAIL") << "\n";
        pass = pass && h <= eps;
    }

    Completion c = completion(le);
    const MetricSetStructure& cs = c.structure;
    std::cout << "constructors (on " << cs.size() << " classes)\n";
    auto show = [&](const std::string& name, const IndexSet& t) {
        WitnessResult w = find_extension(cs, t);
        std::cout << "  " << name << " -> " << w.element << " residual " << w.residual.str() << "\n";
    };
    show("empty", {});
    IndexSet all;
    for (std::size_t i = 0; i < cs.size(); ++i) all.push_back(i);
    show("V", all);
    for (std::size_t i = 0; i < cs.size() && i < 16; ++i) show("{" + std::to_string(i) + "}", {i});

    const Rational r(1, 4);
    try {
        RussellResult rr = russell_gap(le, r, eps);
        std::cout << "russell r 1/4 element " << rr.element << " e " << rr.e_value.str() << " phi "
                  << rr.phi_value.str() << (rr.satisfied ? "" : " (contract not met)") << "\n";
    } catch (const NoWitness& e) {
        std::cout << "russell r 1/4 no witness, best residual " << e.best.residual.str() << "\n";
    }
    spectrum_table(cs);
    if (o.out.size()) write_file(o.out, certificate_json(rep, m.gauge ? *m.gauge : make_gauge({1, 0})));
    std::cout << (pass ? "pass" : "fail") << "\n";
    return pass ? 0 : 1;
}

int cmd_construct(const std::string& path, const std::string& target, const std::string& phi,
                  const std::string& var, const std::string& r, const std::string& s, const std::string& assign,
                  const std::string& slack) {
    Model m = load_model(path);
    WitnessResult w;
    try {
        if (!phi.empty()) {
            const Rational rr = Rational::parse(r), ss = Rational::parse(s);
            if (m.loaded.mss) {
                w = exc_search(*m.loaded.mss, formula_arg("sq", phi), var, parse_assignment(assign), rr, ss);
            } else {
                w = exc_search(m.le(), formula_arg("e", phi), var, parse_assignment(assign), rr, ss,
                               Rational::parse(slack));
            }
        } else {
            const LeStructure& le = m.le();
            MetricSetStructure cs = m.loaded.mss ? *m.loaded.mss : completion(le).structure;
            w = find_extension(cs, parse_indices(target));
        }
    } catch (const NoWitness& e) {
        std::cout << "no witness; best " << e.best.element << " residual " << e.best.residual.str() << "\n";
        return 1;
    }
    std::cout << "element " << w.element << " residual " << w.residual.str() << " satisfied " << w.satisfied
              << "\n";
    return w.satisfied ? 0 : 1;
}

int cmd_spectrum(const std::string& path) {
    Model m = load_model(path);
    if (m.loaded.mss)
        spectrum_table(*m.loaded.mss);
    else
        spectrum_table(completion(m.le()).structure);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metric set models: build, evaluate, translate, check"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--cap", o.cap, "most nodes per enumerated tree level")->capture_default_str();
    app.add_option("--seed", o.seed, "seed for sampled certificates")->capture_default_str();
    app.add_option("--out", o.out, "output file");

    std::string atoms, gauge, model, lang, text, assign, corpus, from, to, target, phi, var = "x", r = "0", s = "1",
                                                                             slack = "0";
    std::size_t height = 0;

    auto* build = app.add_subcommand("build", "quotient model of T_h(Q) under a gauge");
    build->add_option("atoms", atoms, "\"empty\" or an atom metric file")->required();
    build->add_option("height", height)->required();
    build->add_option("gauge", gauge, "sn:N, sn:N:H, or a comma list")->required();
    build->add_option("--corpus", corpus, "e-formulas for the excision certificate, one per line");

    auto* eval = app.add_subcommand("eval", "evaluate a formula on a model file");
    eval->add_option("model", model)->required();
    eval->add_option("language", lang, "sq, e or luk")->required();
    eval->add_option("formula", text, "formula text or schema:NAME[:R]")->required();
    eval->add_option("--assign", assign, "x=0,y=1");

    auto* translate = app.add_subcommand("translate", "translate a formula");
    translate->add_option("from", from)->required();
    translate->add_option("to", to)->required();
    translate->add_option("formula", text)->required();

    auto* check = app.add_subcommand("check", "axiom defects, constructors, russell gap, spectrum");
    check->add_option("model", model)->required();
    check->add_option("--corpus", corpus);
    check->add_option("--gauge", gauge, "overrides the gauge stored in the model");

    auto* construct = app.add_subcommand("construct", "find_extension or exc_search");
    construct->add_option("model", model)->required();
    construct->add_option("--target", target, "comma list of element indices");
    construct->add_option("--phi", phi, "excision formula (sq on mss models, e on le models)");
    construct->add_option("--var", var)->capture_default_str();
    construct->add_option("--r", r)->capture_default_str();
    construct->add_option("--s", s)->capture_default_str();
    construct->add_option("--slack", slack)->capture_default_str();
    construct->add_option("--assign", assign);

    auto* spectrum = app.add_subcommand("spectrum", "chain and discreteness table");
    spectrum->add_option("model", model)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*build) return cmd_build(o, atoms, height, gauge, corpus);
        if (*eval) return cmd_eval(model, lang, text, assign);
        if (*translate) return cmd_translate(from, to, text);
        if (*check) return cmd_check(o, model, corpus, gauge);
        if (*construct) return cmd_construct(model, target, phi, var, r, s, assign, slack);
        if (*spectrum) return cmd_spectrum(model);
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
