// sforms: command-line front end for the quadratic form library.
//
// Every command prints one JSON document (or a table rendered from it).
// Exit status: 0 computed/decided, 2 inconclusive within the budget, 1 usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sforms/acceptance.hpp"
#include "sforms/bounds.hpp"
#include "sforms/construct.hpp"
#include "sforms/local.hpp"
#include "sforms/reduce.hpp"
#include "sforms/slattice.hpp"

using json = nlohmann::ordered_json;
using namespace sforms;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string format = "json";
    long budget = -1;  // command specific default when negative
    unsigned threads = 0;
    std::optional<double> d1, vinf;
    std::uint64_t seed = 0;
};

// ---- input ----

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte is 1-based and points one past the offending character
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << path << ":" << line << ":" << col << " (byte " << e.byte << "): malformed JSON: " << e.what();
        throw UsageError(msg.str());
    }
}

Rational rational_of(const json& v, const std::string& where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(Integer(v.dump()));
    } catch (const std::exception&) {
    }
    throw UsageError(where + ": expected an integer or a rational string, got " + v.dump());
}

long int_of(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw UsageError(where + ": expected an integer, got " + v.dump());
    return v.get<long>();
}

QuadraticForm form_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw UsageError(where + ": form must be a JSON object");
    if (j.contains("gram")) {
        const json& g = j.at("gram");
        if (!g.is_array()) throw UsageError(where + ": gram must be an array of rows");
        Matrix m(g.size(), g.size());
        for (std::size_t r = 0; r < g.size(); ++r) {
            if (!g[r].is_array() || g[r].size() != g.size()) throw UsageError(where + ": gram must be square");
            for (std::size_t c = 0; c < g.size(); ++c) m(r, c) = rational_of(g[r][c], where + ": gram entry");
        }
        return QuadraticForm::from_gram(m);
    }
    if (!j.contains("d") || !j.contains("coeffs")) throw UsageError(where + ": form needs \"d\" and \"coeffs\"");
    long d = int_of(j.at("d"), where + ": d");
    if (d < 1) throw UsageError(where + ": d must be positive");
    std::map<std::pair<std::size_t, std::size_t>, Rational> a;
    const json& cs = j.at("coeffs");
    if (!cs.is_array()) throw UsageError(where + ": coeffs must be an array");
    for (const auto& t : cs) {
        if (!t.is_array() || t.size() != 3) throw UsageError(where + ": each coefficient is [i, j, value]");
        long i = int_of(t[0], where + ": index"), k = int_of(t[1], where + ": index");
        if (i < 1 || k < 1 || i > d || k > d || i > k)
            throw UsageError(where + ": coefficient index (" + std::to_string(i) + "," + std::to_string(k) + ") must satisfy 1 <= i <= j <= d");
        auto key = std::make_pair(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(k - 1));
        if (a.count(key)) throw UsageError(where + ": duplicate coefficient");
        a[key] = rational_of(t[2], where + ": coefficient");
    }
    return QuadraticForm::from_coeffs(static_cast<std::size_t>(d), a);
}

QuadraticForm load_form(const std::string& path) { return form_from_json(read_json(path), path); }

PlaceSet places_from_json(const json& s, const std::string& where) {
    if (s.is_string()) return parse_place_set(s.get<std::string>());
    if (!s.is_array()) throw UsageError(where + ": S must be a list of primes or a string like \"inf,2,3\"");
    std::vector<Integer> ps;
    for (const auto& x : s) {
        if (x.is_string()) {
            Place v = parse_place(x.get<std::string>());
            if (v.is_finite()) ps.push_back(v.p);
        } else {
            ps.emplace_back(Integer(std::to_string(int_of(x, where + ": S"))));
        }
    }
    return PlaceSet(ps);
}

SLattice load_lattice(const std::string& path) {
    json j = read_json(path);
    if (!j.is_object() || !j.contains("basis")) throw UsageError(path + ": lattice needs \"basis\"");
    const json& b = j.at("basis");
    if (!b.is_array() || b.empty()) throw UsageError(path + ": basis must be a nonempty array of rows");
    Matrix m(b.size(), b.size());
    for (std::size_t r = 0; r < b.size(); ++r) {
        if (!b[r].is_array() || b[r].size() != b.size()) throw UsageError(path + ": basis must be square");
        for (std::size_t c = 0; c < b.size(); ++c) m(r, c) = rational_of(b[r][c], path + ": basis entry");
    }
    PlaceSet S = j.contains("S") ? places_from_json(j.at("S"), path) : PlaceSet();
    return SLattice(S, m);
}

// ascending coefficient list, e.g. "-1,0,1" for t^2 - 1
Poly parse_poly(const std::string& s) {
    Poly q;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            q.push_back(parse_rational(tok));
        } catch (const std::exception&) {
            throw UsageError("bad polynomial coefficient '" + tok + "'");
        }
    }
    if (q.empty()) throw UsageError("empty polynomial");
    return q;
}

// ---- output ----

json jq(const Rational& q) { return to_string(q); }
json jz(const Integer& z) { return z.get_str(); }

json jvec(const Vector& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(jq(x));
    return a;
}

json jmat(const Matrix& m) {
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(jq(m(i, j)));
        a.push_back(row);
    }
    return a;
}

json jform(const QuadraticForm& q) {
    json c = json::array();
    for (std::size_t i = 0; i < q.dim(); ++i)
        for (std::size_t j = i; j < q.dim(); ++j) {
            Rational v = q.coeff(i, j);
            if (v != 0) c.push_back(json::array({i + 1, j + 1, to_string(v)}));
        }
    return json{{"d", q.dim()}, {"coeffs", c}};
}

json jsig(const Signature& s) { return json{{"pos", s.pos}, {"neg", s.neg}, {"null", s.null}}; }

std::string fmt_double(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

// Tracks which parametric symbols and approximations a response depends on.
struct Provenance {
    bool d1 = false, vinf = false, approx = false;

    json magnitude(const Magnitude& m, const Options& o) {
        json j;
        j["expr"] = m.str();
        bool uses_d1 = m.d1_exponent() != 0, uses_vinf = m.vinf_exponent() != 0;
        d1 |= uses_d1;
        vinf |= uses_vinf;
        if (!m.parametric()) {
            if (auto e = m.numeric_exact(4096)) j["exact"] = to_string(*e);
        }
        json par = json::array();
        if (uses_d1) par.push_back("D1");
        if (uses_vinf) par.push_back("V_inf");
        j["parametric"] = par;
        if ((!uses_d1 || o.d1) && (!uses_vinf || o.vinf))
            j["log10"] = fmt_double(m.log10(o.d1.value_or(1.0), o.vinf.value_or(1.0)));
        return j;
    }

    std::string exactness() const {
        if (d1 || vinf) return "parametric(D1,V_inf)";
        if (approx) return "approximate-inf";
        return "exact";
    }
    json parametric() const {
        json a = json::array();
        if (d1) a.push_back("D1");
        if (vinf) a.push_back("V_inf");
        return a;
    }
};

struct Response {
    std::string command;
    json request = json::object();
    json result = json::object();
    Provenance prov;
    int exit_code = 0;
};

void render_table(const json& j, const std::string& prefix, std::ostream& os) {
    auto scalar = [](const json& v) -> std::string { return v.is_string() ? v.get<std::string>() : v.dump(); };
    auto flat = [](const json& a) {
        for (const auto& x : a)
            if (x.is_structured()) return false;
        return true;
    };
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) render_table(v, prefix.empty() ? k : prefix + "." + k, os);
    } else if (j.is_array() && flat(j)) {
        os << std::left << std::setw(32) << prefix << " [";
        for (std::size_t i = 0; i < j.size(); ++i) os << (i ? " " : "") << scalar(j[i]);
        os << "]\n";
    } else if (j.is_array()) {
        bool matrix = true;
        for (const auto& r : j) matrix = matrix && r.is_array() && flat(r);
        if (matrix) {
            os << prefix << "\n";
            for (const auto& r : j) {
                os << "   ";
                for (const auto& x : r) os << " " << std::right << std::setw(8) << scalar(x);
                os << "\n";
            }
        } else {
            for (std::size_t i = 0; i < j.size(); ++i) render_table(j[i], prefix + "[" + std::to_string(i) + "]", os);
        }
    } else {
        os << std::left << std::setw(32) << prefix << " " << scalar(j) << "\n";
    }
}

void emit(const Response& r, const Options& o) {
    json doc;
    doc["schema"] = 1;
    doc["version"] = kVersion;
    doc["command"] = r.command;
    doc["request"] = r.request;
    doc["exactness"] = r.prov.exactness();
    doc["parametric"] = r.prov.parametric();
    doc["result"] = r.result;
    if (o.format == "table")
        render_table(doc, "", std::cout);
    else
        std::cout << doc.dump(2) << "\n";
}

unsigned threads_of(const Options& o) { return o.threads ? o.threads : default_threads(); }

Place place_arg(const std::string& s) {
    try {
        return parse_place(s);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

PlaceSet places_arg(const std::string& s) {
    try {
        return parse_place_set(s);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

Integer prime_arg(long p) {
    if (!is_prime(Integer(p))) throw UsageError("--p must be prime");
    return Integer(p);
}

json local_json(const QuadraticForm& q, const Place& v) {
    LocalInvariants inv = local_invariants(q, v);
    StandardForm sf = standard_form_of(q, v);
    json j;
    j["place"] = v.str();
    j["disc"] = jq(inv.disc);
    if (v.is_finite())
        j["hasse"] = inv.hasse;
    else
        j["signature"] = jsig(inv.sig);
    j["isotropic"] = sf.isotropic;
    j["hyperbolic_planes"] = sf.hyperbolic_planes;
    j["standard_form"] = jvec(sf.diag);
    j["anisotropic_kernel"] = jvec(sf.kernel);
    return j;
}

json equiv_json(const EquivResult& r) {
    json j;
    j["status"] = to_string(r.status);
    if (r.cert) {
        j["gamma"] = jmat(r.cert->gamma);
        j["ring"] = r.cert->ring ? "Z_S(" + r.cert->ring->str() + ")" : "Z";
        j["denominator"] = jz(r.cert->denominator);
        j["verified"] = r.cert->verified;
    }
    if (!r.reason.empty()) j["reason"] = r.reason;
    j["searched_bound"] = jz(r.searched_bound);
    return j;
}

json table_json(const BoundTable& t, Provenance& prov, const Options& o) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r;
        r["place"] = row.place.str();
        r["relation"] = row.strict ? "<" : "<=";
        r["bound"] = prov.magnitude(row.value, o);
        rows.push_back(r);
    }
    return rows;
}

IsoCase case_arg(const std::string& c, std::optional<Integer>& p0, long p0_arg) {
    if (c == "isotropic") return IsoCase::RIsotropic;
    if (c == "anisotropic") {
        if (p0_arg <= 0) throw UsageError("--case anisotropic needs --p0");
        p0 = prime_arg(p0_arg);
        return IsoCase::RAnisotropic;
    }
    throw UsageError("--case must be isotropic or anisotropic");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sforms: quadratic forms over Q and Z_S"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);

    Options o;
    app.add_option("--format", o.format, "json or table")->check(CLI::IsMember({"json", "table"}));
    app.add_option("--budget", o.budget, "search budget (command specific)");
    app.add_option("--threads", o.threads, "worker threads (default SFORMS_THREADS or hardware)");
    app.add_option("--d1", o.d1, "numeric value substituted for D1 in log10 fields");
    app.add_option("--vinf", o.vinf, "numeric value substituted for V_inf in log10 fields");
    app.add_option("--seed", o.seed, "seed (all commands are deterministic; recorded only)");

    std::string form, q1, q2, places = "inf", place = "inf", ring = "Z", lattice_file, poly, kase = "isotropic", kind;
    long d = 0, p = 0, n = 0, m = 0, p0 = 0, kmax = 2, depth = 6, rank = 1;
    std::string det_s, r_s, diag_s, alpha_s;
    bool rescale = false, cells = false;

    auto* classify = app.add_subcommand("classify", "local invariants and standard forms");
    classify->add_option("--form", form, "form JSON")->required();
    classify->add_option("--places", places, "places, e.g. inf,2,17");

    auto* standardize = app.add_subcommand("standardize", "standardization witness at one place");
    standardize->add_option("--form", form)->required();
    standardize->add_option("--place", place)->required();

    auto* equiv = app.add_subcommand("equiv", "Z- or Z_S-equivalence with certificate");
    equiv->add_option("--q1", q1)->required();
    equiv->add_option("--q2", q2)->required();
    equiv->add_option("--ring", ring)->check(CLI::IsMember({"Z", "ZS"}));
    equiv->add_option("--places", places, "S for --ring ZS");
    equiv->add_option("--kmax", kmax, "largest power of p_S in the denominator (ZS)");

    auto* reduce = app.add_subcommand("reduce", "Minkowski reduction of a positive definite form");
    reduce->add_option("--form", form)->required();

    auto* enumerate = app.add_subcommand("enumerate-reduced", "reduced positive definite forms of given d and det");
    enumerate->add_option("--d", d)->required();
    enumerate->add_option("--det", det_s)->required();

    auto* autgroup = app.add_subcommand("autgroup", "automorphism group of a definite integral form");
    autgroup->add_option("--form", form)->required();

    auto* generators = app.add_subcommand("generators", "bounds for a generating set of O(Q, Z_S)");
    generators->add_option("--form", form)->required();
    generators->add_option("--places", places);
    generators->add_option("--case", kase, "isotropic or anisotropic (at infinity)");
    generators->add_option("--p0", p0, "isotropic prime for the anisotropic case");

    auto* bounds = app.add_subcommand("bounds", "explicit bounds: equiv, orbit, ledger, mahler, recurrence");
    bounds->add_option("kind", kind)->required()->check(CLI::IsMember({"equiv", "orbit", "ledger", "mahler", "recurrence"}));
    bounds->add_option("--q1", q1);
    bounds->add_option("--q2", q2);
    bounds->add_option("--form", form);
    bounds->add_option("--places", places);
    bounds->add_option("--case", kase);
    bounds->add_option("--p0", p0);
    bounds->add_option("--d", d);
    bounds->add_option("--place", place);
    bounds->add_option("--alpha1-sq", alpha_s);

    auto* volumes = app.add_subcommand("volumes", "Haar volumes and group orders");
    volumes->add_option("kind", kind)->required()->check(CLI::IsMember({"vol-gl-zp", "card-sl2", "card-gl", "flag-count", "xi-p",
                                                                         "xi-decay-bound", "partition-measure", "vol-orth-ball-padic",
                                                                         "vol-orth-ball-real", "vol-w-ball", "vol-x1"}));
    volumes->add_option("--d", d);
    volumes->add_option("--p", p);
    volumes->add_option("--n", n);
    volumes->add_option("--m", m);
    volumes->add_option("--r", r_s);
    volumes->add_option("--diag", diag_s, "comma separated diagonal");
    volumes->add_option("--places", places);

    auto* lattice = app.add_subcommand("lattice", "S-lattice computations");
    lattice->add_option("kind", kind)->required()->check(CLI::IsMember({"covolume", "systole", "mahler", "submodules", "good-check"}));
    lattice->add_option("--lattice", lattice_file);
    lattice->add_option("--rank", rank, "submodule rank");
    lattice->add_option("--poly", poly);
    lattice->add_option("--p", p);
    lattice->add_option("--depth", depth);
    lattice->add_flag("--rescale", rescale);
    lattice->add_flag("--cells", cells);

    auto* good = app.add_subcommand("good-check", "(C, theta)-goodness of a polynomial on Z_p");
    good->add_option("--poly", poly, "ascending coefficients, e.g. -1,0,1")->required();
    good->add_option("--p", p)->required();
    good->add_option("--depth", depth);
    good->add_flag("--rescale", rescale, "rescale to p-integral coefficients first");
    good->add_flag("--cells", cells, "list every (ball, epsilon) cell");

    auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    Response r;
    try {
        auto req = [&](const char* k, const json& v) { r.request[k] = v; };
        if (o.budget >= 0) req("budget", o.budget);
        if (o.seed) req("seed", o.seed);

        if (classify->parsed()) {
            r.command = "classify";
            QuadraticForm q = load_form(form);
            PlaceSet S = places_arg(places);
            req("form", jform(q));
            req("places", S.str());
            r.result["det"] = jq(q.det());
            r.result["signature"] = jsig(q.signature());
            r.result["integral"] = q.is_integral();
            json loc = json::array();
            for (const auto& v : S.places()) loc.push_back(local_json(q, v));
            r.result["local"] = loc;
        } else if (standardize->parsed()) {
            r.command = "standardize";
            QuadraticForm q = load_form(form);
            Place v = place_arg(place);
            req("form", jform(q));
            req("place", v.str());
            StandardizationWitness w = sforms::standardize(q, v, o.budget >= 0 ? o.budget : 1000000);
            r.result["standard_form"] = jvec(w.standard.diag);
            r.result["S"] = jmat(w.S);
            r.result["r"] = jvec(w.r);
            r.result["M"] = jmat(w.M);
            if (w.g) r.result["g"] = jmat(*w.g);
            r.result["norm_sq"] = jq(w.norm_sq);
            r.result["bound_sq"] = jq(w.bound_sq);
            r.result["within_bound"] = w.within_bound();
            r.result["verified"] = verify_witness(w, q);
            if (w.approximate) {
                r.prov.approx = true;
                json gf = json::array();
                for (double x : w.g_float) gf.push_back(fmt_double(x));
                r.result["g_approx"] = gf;
                r.result["residual"] = fmt_double(w.residual);
            }
        } else if (equiv->parsed()) {
            r.command = "equiv";
            QuadraticForm a = load_form(q1), b = load_form(q2);
            req("q1", jform(a));
            req("q2", jform(b));
            req("ring", ring);
            Integer B = o.budget >= 0 ? Integer(o.budget) : Integer(100);
            EquivResult res;
            if (ring == "Z") {
                res = z_equivalent(a, b, B, threads_of(o));
            } else {
                PlaceSet S = places_arg(places);
                req("places", S.str());
                req("kmax", kmax);
                res = zs_equivalent(a, b, S, ZSBudget{B, kmax}, threads_of(o));
            }
            r.result = equiv_json(res);
            if (res.status == EquivStatus::Inconclusive) r.exit_code = 2;
        } else if (reduce->parsed()) {
            r.command = "reduce";
            QuadraticForm q = load_form(form);
            req("form", jform(q));
            Reduction red = minkowski_reduce(q);
            r.result["reduced"] = jform(red.reduced);
            r.result["gamma"] = jmat(red.gamma);
            r.result["successive_minima"] = jvec(successive_minima(q));
            r.result["within_norm_cap"] = within_reduced_norm_cap(red.reduced);
        } else if (enumerate->parsed()) {
            r.command = "enumerate-reduced";
            Rational dv = parse_rational(det_s);
            req("d", d);
            req("det", jq(dv));
            if (d < 1) throw UsageError("--d must be positive");
            std::vector<QuadraticForm> forms = o.budget > 0 ? enumerate_reduced_definite(d, dv, o.budget) : enumerate_reduced_definite(d, dv);
            json fs = json::array();
            for (const auto& f : forms) fs.push_back(jform(f));
            r.result["count"] = forms.size();
            r.result["forms"] = fs;
        } else if (autgroup->parsed()) {
            r.command = "autgroup";
            QuadraticForm q = load_form(form);
            req("form", jform(q));
            AutomorphismGroup g = automorphism_generators(q);
            r.result["order"] = g.order;
            json gens = json::array();
            for (const auto& x : g.generators) gens.push_back(jmat(x));
            r.result["generators"] = gens;
            r.result["bound_sq"] = jq(g.bound_sq);
            r.result["all_within_bound"] = g.all_within_bound;
        } else if (generators->parsed()) {
            r.command = "generators";
            QuadraticForm q = load_form(form);
            PlaceSet S = places_arg(places);
            std::optional<Integer> pp;
            IsoCase c = case_arg(kase, pp, p0);
            req("form", jform(q));
            req("places", S.str());
            req("case", kase);
            if (pp) req("p0", jz(*pp));
            r.result["bounds"] = table_json(bound_generators(q, S, c, pp), r.prov, o);
        } else if (bounds->parsed()) {
            r.command = "bounds " + kind;
            if (kind == "equiv") {
                if (q1.empty() || q2.empty()) throw UsageError("bounds equiv needs --q1 and --q2");
                QuadraticForm a = load_form(q1), b = load_form(q2);
                PlaceSet S = places_arg(places);
                std::optional<Integer> pp;
                IsoCase c = case_arg(kase, pp, p0);
                req("q1", jform(a));
                req("q2", jform(b));
                req("places", S.str());
                req("case", kase);
                if (pp) req("p0", jz(*pp));
                r.result["bounds"] = table_json(bound_equiv(a, b, S, c, pp), r.prov, o);
            } else if (kind == "orbit") {
                if (form.empty()) throw UsageError("bounds orbit needs --form");
                QuadraticForm q = load_form(form);
                PlaceSet S = places_arg(places);
                req("form", jform(q));
                req("places", S.str());
                r.result["volume_orbit_bound"] = r.prov.magnitude(volume_orbit_bound(q, S), o);
            } else if (kind == "ledger") {
                PlaceSet S = places_arg(places);
                req("d", d);
                req("places", S.str());
                std::vector<Integer> primes = S.finite.empty() ? std::vector<Integer>{2} : S.finite;
                json rows = json::array();
                for (const auto& e : constants_ledger(static_cast<int>(d), primes)) {
                    json row;
                    row["name"] = e.name;
                    row["formula"] = e.formula;
                    row["value"] = r.prov.magnitude(e.value, o);
                    rows.push_back(row);
                }
                r.result["constants"] = rows;
                json checks = json::array();
                bool all = true;
                for (const auto& c : check_ledger(static_cast<int>(d), primes)) {
                    checks.push_back(json{{"name", c.name}, {"agree", c.agree}});
                    all = all && c.agree;
                }
                r.result["fourth_power_checks"] = checks;
                r.result["consistent"] = all;
            } else if (kind == "mahler") {
                Rational a2 = alpha_s.empty() ? Rational(1) : parse_rational(alpha_s);
                req("d", d);
                req("alpha1_sq", jq(a2));
                r.result["mahler_bound"] = r.prov.magnitude(mahler_bound(static_cast<int>(d), a2), o);
            } else {
                Place v = place_arg(place);
                req("d", d);
                req("place", v.str());
                auto [C, theta] = recurrence_constants(static_cast<int>(d), v);
                r.result["C"] = jz(C);
                r.result["theta"] = jq(theta);
            }
        } else if (volumes->parsed()) {
            r.command = "volumes " + kind;
            auto need_p = [&] {
                req("p", p);
                return prime_arg(p);
            };
            auto need_n = [&] {
                if (n < 0) throw UsageError("--n must be nonnegative");
                req("n", n);
                return static_cast<unsigned long>(n);
            };
            if (kind == "vol-gl-zp") {
                req("d", d);
                Integer pp = need_p();
                r.result["value"] = jq(vol_gl_zp(static_cast<int>(d), pp));
            } else if (kind == "card-sl2") {
                Integer pp = need_p();
                r.result["value"] = jz(card_sl2(pp, need_n()));
            } else if (kind == "card-gl") {
                req("d", d);
                Integer pp = need_p();
                r.result["value"] = jz(card_gl(static_cast<int>(d), pp, need_n()));
            } else if (kind == "flag-count") {
                req("d", d);
                Integer pp = need_p();
                r.result["value"] = jz(flag_count(static_cast<int>(d), pp, need_n()));
            } else if (kind == "xi-p") {
                Integer pp = need_p();
                req("m", m);
                r.result["value"] = jq(xi_p(pp, m));
            } else if (kind == "xi-decay-bound") {
                Integer pp = need_p();
                req("m", m);
                r.result["value"] = r.prov.magnitude(xi_decay_bound(pp, m), o);
            } else if (kind == "partition-measure") {
                Integer pp = need_p();
                req("n", n);
                r.result["value"] = jq(partition_measure(pp, n));
            } else if (kind == "vol-orth-ball-padic") {
                Integer pp = need_p();
                req("n", n);
                Vector diag = parse_poly(diag_s);
                req("diag", jvec(diag));
                r.result["value"] = jq(vol_orthogonal_ball_padic(diag, pp, n));
            } else if (kind == "vol-orth-ball-real") {
                Rational rr = parse_rational(r_s.empty() ? "1" : r_s);
                req("d", d);
                req("r", jq(rr));
                auto [lo, hi] = vol_orthogonal_ball_real_bounds(static_cast<int>(d), rr);
                r.result["lower"] = jq(lo);
                r.result["upper"] = jq(hi);
            } else if (kind == "vol-w-ball") {
                req("d", d);
                Integer pp = need_p();
                req("n", n);
                r.result["value"] = jq(vol_w_ball(static_cast<int>(d), pp, n));
            } else {
                PlaceSet S = places_arg(places);
                req("d", d);
                req("places", S.str());
                r.result["value"] = r.prov.magnitude(vol_x1(static_cast<int>(d), S), o);
            }
        } else if (lattice->parsed() || good->parsed()) {
            if (good->parsed()) kind = "good-check";
            r.command = lattice->parsed() ? "lattice " + kind : "good-check";
            if (kind == "good-check") {
                if (poly.empty() || p == 0) throw UsageError("good-check needs --poly and --p");
                Integer pp = prime_arg(p);
                Poly q = parse_poly(poly);
                req("poly", jvec(q));
                req("p", jz(pp));
                req("depth", depth);
                if (rescale) {
                    q = p_integral_rescale(q, pp);
                    req("rescaled", jvec(q));
                }
                GoodnessReport g = good_check(q, pp, depth, cells);
                r.result["degree"] = g.d0;
                r.result["C"] = jz(g.C);
                r.result["theta"] = jq(g.theta);
                r.result["balls"] = g.balls;
                r.result["checks"] = g.checks;
                r.result["violations"] = g.violations;
                r.result["worst_ratio"] = fmt_double(g.worst_ratio);
                r.result["passed"] = g.passed;
                if (cells) {
                    json cs = json::array();
                    for (const auto& c : g.cells)
                        cs.push_back(json{{"j", c.j}, {"a", c.a}, {"k", c.k}, {"rel", to_string(c.rel)}, {"m", c.m}});
                    r.result["cells"] = cs;
                }
            } else {
                if (lattice_file.empty()) throw UsageError("lattice " + kind + " needs --lattice");
                SLattice L = load_lattice(lattice_file);
                req("basis", jmat(L.basis));
                req("S", L.S.str());
                std::size_t budget = o.budget > 0 ? static_cast<std::size_t>(o.budget) : 1000000;
                if (kind == "covolume") {
                    r.result["covolume"] = jq(covolume(L));
                    UnimodularBasis u = unimodular_basis(L);
                    r.result["unimodular_basis"] = jmat(u.basis);
                } else if (kind == "systole") {
                    Systole s = systole(L, budget);
                    r.result["norm"] = "euclidean at infinity, p-adic max at finite places";
                    r.result["alpha1_sq"] = jq(s.alpha1_sq);
                    if (s.alpha1) r.result["alpha1"] = jq(*s.alpha1);
                    r.result["alpha1_approx"] = fmt_double(std::sqrt(s.alpha1_sq.get_d()));
                    r.result["witness"] = jvec(s.witness);
                    r.result["certified"] = s.certified;
                    r.result["enumerated"] = s.enumerated;
                    if (!s.certified) r.exit_code = 2;
                } else if (kind == "mahler") {
                    MahlerBasis mb = mahler_basis(L);
                    r.result["basis"] = jmat(mb.basis);
                    r.result["gamma"] = jmat(mb.gamma);
                    r.result["norm_inf"] = jq(mb.norm_inf);
                    r.result["alpha1_sq"] = jq(mb.alpha1_sq);
                    r.result["bound"] = r.prov.magnitude(mb.bound, o);
                    r.result["p_unimodular"] = mb.p_unimodular;
                    r.result["within_bound"] = mb.within_bound;
                } else if (kind == "submodules") {
                    req("rank", rank);
                    if (rank < 1) throw UsageError("--rank must be positive");
                    json subs = json::array();
                    for (const auto& s : submodules_below_one(L, static_cast<std::size_t>(rank), budget)) {
                        json b = json::array();
                        for (const auto& v : s.basis) b.push_back(jvec(v));
                        json one{{"basis", b}, {"covolume_sq", jq(s.covolume.squared)}};
                        if (s.covolume.exact) one["covolume"] = jq(*s.covolume.exact);
                        subs.push_back(one);
                    }
                    r.result["count"] = subs.size();
                    r.result["submodules"] = subs;
                } else {
                    throw UsageError("unknown lattice operation");
                }
            }
        } else if (selftest->parsed()) {
            r.command = "selftest";
            json rows = json::array();
            std::size_t passed = 0;
            for (const auto& c : acceptance::run_all(nullptr)) {
                rows.push_back(json{{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"detail", c.detail}});
                passed += c.pass;
            }
            r.result["criteria"] = rows;
            r.result["passed"] = passed;
            r.result["total"] = rows.size();
            if (passed != rows.size()) r.exit_code = 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const BudgetExceeded& e) {
        r.result = json{{"status", "inconclusive"}, {"reason", e.what()}};
        emit(r, o);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    emit(r, o);
    return r.exit_code;
}
