#include "nlap/config.hpp"

#include "nlap/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace nlap {

void ledger_defaults(int N, double& pbar_star, double& ptilde) {
    if (N == 2) {
        pbar_star = 10.0;
        ptilde = 4.5;
    } else if (N == 3) {
        pbar_star = 20.0;
        ptilde = 6.5;
    } else {
        // Any pair with pbar_star > 2N^2 and ptilde in (2N, pbar_star/N).
        pbar_star = 2.0 * N * N + 2.0 * N;
        ptilde = 2.0 * N + 0.5;
    }
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Raw key-value store; every consumer removes its key, so whatever is left
// at the end is unknown by construction.
struct KeyStore {
    std::map<std::string, std::string> kv;

    bool take(const std::string& key, std::string& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        out = it->second;
        kv.erase(it);
        return true;
    }
};

double to_double(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    double x = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw ParamError("config: key '" + key + "' expects a number, got '" +
                         v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    long x = std::strtol(s, &end, 10);
    if (end == s || *end != '\0')
        throw ParamError("config: key '" + key + "' expects an integer, got '" +
                         v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    unsigned long long x = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || v[0] == '-')
        throw ParamError("config: key '" + key +
                         "' expects an unsigned integer, got '" + v + "'");
    return std::uint64_t(x);
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_double(key, tok));
    if (out.empty())
        throw ParamError("config: key '" + key + "' expects a list");
    return out;
}

std::vector<long> to_longs(const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    std::vector<long> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_long(key, tok));
    if (out.empty())
        throw ParamError("config: key '" + key + "' expects a list");
    return out;
}

} // namespace

RunConfig parse_config(std::istream& is) {
    KeyStore store;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParamError("config: line " + std::to_string(lineno) +
                             " is not 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ParamError("config: line " + std::to_string(lineno) +
                             " has an empty key or value");
        if (!store.kv.emplace(key, val).second)
            throw ParamError("config: duplicate key '" + key + "'");
    }

    RunConfig cfg;
    std::string v;

    if (store.take("problem.N", v)) cfg.params.N = int(to_long("problem.N", v));
    if (store.take("problem.p", v)) cfg.params.p = to_double("problem.p", v);
    if (store.take("problem.q", v)) cfg.params.q = to_double("problem.q", v);
    if (store.take("problem.alpha", v))
        cfg.params.alpha = to_double("problem.alpha", v);
    if (store.take("problem.a1", v)) cfg.params.a1 = to_double("problem.a1", v);
    if (store.take("problem.f", v)) {
        cfg.f_kind = fkind_from_string(v);
        if (cfg.f_kind == FKind::custom_tabulated)
            throw ParamError(
                "config: problem.f custom_tabulated needs sample arrays and "
                "cannot be loaded from a config file");
    }
    bool have_lambda = store.take("problem.lambda", v);
    if (have_lambda) cfg.lambda = to_double("problem.lambda", v);
    bool have_frac = store.take("problem.lambda_frac", v);
    if (have_frac) cfg.lambda_frac = to_double("problem.lambda_frac", v);

    if (store.take("weight.kind", v)) cfg.weight.kind = weight_kind_from_string(v);
    bool have_rate = store.take("weight.rate", v);
    if (have_rate) cfg.weight.gamma_or_rate = to_double("weight.rate", v);
    if (store.take("weight.gamma", v)) {
        if (have_rate)
            throw ParamError(
                "config: weight.rate and weight.gamma are synonyms; give one");
        cfg.weight.gamma_or_rate = to_double("weight.gamma", v);
    }
    if (store.take("weight.amplitude", v))
        cfg.weight.amplitude = to_double("weight.amplitude", v);

    if (store.take("mesh.R", v)) cfg.R = to_double("mesh.R", v);
    if (store.take("mesh.M", v)) cfg.M = int(to_long("mesh.M", v));
    if (store.take("mesh.grading", v)) cfg.grading = to_double("mesh.grading", v);
    if (store.take("mesh.R_list", v)) cfg.R_list = to_doubles("mesh.R_list", v);
    if (store.take("mesh.nodes_per_unit", v))
        cfg.nodes_per_unit = int(to_long("mesh.nodes_per_unit", v));

    if (store.take("schedule.k", v)) cfg.k_list = to_longs("schedule.k", v);

    if (store.take("sweep.lambda", v))
        cfg.sweep_lambda = to_doubles("sweep.lambda", v);
    if (store.take("sweep.lambda_frac", v))
        cfg.sweep_lambda_frac = to_doubles("sweep.lambda_frac", v);

    if (store.take("solve.tol", v)) cfg.tol = to_double("solve.tol", v);

    int nconst = 0;
    if (store.take("constants.K1", v)) { cfg.constants.K1 = to_double("constants.K1", v); ++nconst; }
    if (store.take("constants.K2", v)) { cfg.constants.K2 = to_double("constants.K2", v); ++nconst; }
    if (store.take("constants.K3", v)) { cfg.constants.K3 = to_double("constants.K3", v); ++nconst; }
    if (store.take("constants.C_alphaN", v)) { cfg.constants.C_alphaN = to_double("constants.C_alphaN", v); ++nconst; }
    if (store.take("constants.C_star", v)) { cfg.constants.C_star = to_double("constants.C_star", v); ++nconst; }
    if (nconst != 0 && nconst != 5)
        throw ParamError(
            "config: constants.{K1,K2,K3,C_alphaN,C_star} must be given "
            "together or not at all");
    cfg.have_constants = nconst == 5;
    if (store.take("constants.samples", v))
        cfg.estimate_samples = int(to_long("constants.samples", v));

    if (store.take("ledger.pbar_star", v))
        cfg.ledger_pbar_star = to_double("ledger.pbar_star", v);
    if (store.take("ledger.ptilde", v))
        cfg.ledger_ptilde = to_double("ledger.ptilde", v);
    if (store.take("ledger.R_star", v))
        cfg.ledger_R_star = to_double("ledger.R_star", v);
    if (store.take("ledger.C_rho", v))
        cfg.ledger_C_rho = to_double("ledger.C_rho", v);

    if (store.take("threshold.R", v)) cfg.thr_R = to_double("threshold.R", v);
    if (store.take("threshold.delta", v))
        cfg.thr_delta = to_double("threshold.delta", v);
    if (store.take("threshold.M", v)) cfg.thr_M = int(to_long("threshold.M", v));
    if (store.take("threshold.lambda", v))
        cfg.thr_lambda = to_doubles("threshold.lambda", v);

    if (store.take("output.dir", v)) cfg.out_dir = v;
    if (store.take("seed", v)) cfg.seed = to_u64("seed", v);

    if (!store.kv.empty())
        throw ParamError("config: unknown key '" + store.kv.begin()->first +
                         "'");

    // Window validation, each failure naming its invariant.
    cfg.params.weight_gamma = cfg.weight.gamma_or_rate;
    {
        ProblemParams probe = cfg.params;
        probe.lambda = 0.0;
        validate_params(probe);
    }
    validate_weight(cfg.weight, cfg.params.N, cfg.params.q);

    if (have_lambda && have_frac)
        throw ParamError(
            "config: problem.lambda and problem.lambda_frac are exclusive");
    if (have_lambda && !(cfg.lambda >= 0.0))
        throw ParamError("config: problem.lambda >= 0 violated");
    if (have_frac && !(cfg.lambda_frac > 0.0 && cfg.lambda_frac < 1.0))
        throw ParamError("config: problem.lambda_frac in (0,1) violated");

    if (!(cfg.R > 0.0)) throw ParamError("config: mesh.R > 0 violated");
    if (cfg.M < 8) throw ParamError("config: mesh.M >= 8 violated");
    if (!(cfg.grading >= 1.0))
        throw ParamError("config: mesh.grading >= 1 violated");
    for (std::size_t i = 0; i < cfg.R_list.size(); ++i)
        if (!(cfg.R_list[i] > 0.0) ||
            (i > 0 && !(cfg.R_list[i] > cfg.R_list[i - 1])))
            throw ParamError(
                "config: mesh.R_list positive strictly increasing violated");
    if (!(cfg.nodes_per_unit > 0))
        throw ParamError("config: mesh.nodes_per_unit > 0 violated");

    for (std::size_t i = 0; i < cfg.k_list.size(); ++i)
        if (cfg.k_list[i] < 1 || (i > 0 && cfg.k_list[i] <= cfg.k_list[i - 1]))
            throw ParamError(
                "config: schedule.k positive strictly increasing violated");
    if (cfg.k_list.empty())
        throw ParamError("config: schedule.k nonempty violated");

    if (!cfg.sweep_lambda.empty() && !cfg.sweep_lambda_frac.empty())
        throw ParamError(
            "config: sweep.lambda and sweep.lambda_frac are exclusive");
    auto check_decreasing = [](const std::vector<double>& xs, const char* key) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (!(xs[i] > 0.0) || (i > 0 && !(xs[i] < xs[i - 1])))
                throw ParamError(std::string("config: ") + key +
                                 " positive strictly decreasing violated");
    };
    check_decreasing(cfg.sweep_lambda, "sweep.lambda");
    check_decreasing(cfg.sweep_lambda_frac, "sweep.lambda_frac");
    for (double fr : cfg.sweep_lambda_frac)
        if (!(fr < 1.0))
            throw ParamError("config: sweep.lambda_frac below 1 violated");

    if (!(cfg.tol > 0.0)) throw ParamError("config: solve.tol > 0 violated");
    if (cfg.have_constants) {
        const SolverConstants& c = cfg.constants;
        if (!(c.K1 > 0.0 && c.K2 > 0.0 && c.K3 > 0.0 && c.C_alphaN > 0.0 &&
              c.C_star > 0.0))
            throw ParamError("config: constants.* > 0 violated");
    }
    if (cfg.estimate_samples < 10)
        throw ParamError("config: constants.samples >= 10 violated");

    if (cfg.ledger_pbar_star != 0.0 || cfg.ledger_ptilde != 0.0) {
        if (cfg.ledger_pbar_star == 0.0 || cfg.ledger_ptilde == 0.0)
            throw ParamError(
                "config: ledger.pbar_star and ledger.ptilde come together");
    }
    if (!(cfg.ledger_R_star > 0.0))
        throw ParamError("config: ledger.R_star > 0 violated");
    if (!(cfg.ledger_C_rho > 0.0))
        throw ParamError("config: ledger.C_rho > 0 violated");

    if (!(cfg.thr_R > 0.0)) throw ParamError("config: threshold.R > 0 violated");
    if (!(cfg.thr_delta > 0.0))
        throw ParamError("config: threshold.delta > 0 violated");
    if (cfg.thr_M < 8) throw ParamError("config: threshold.M >= 8 violated");
    for (std::size_t i = 0; i < cfg.thr_lambda.size(); ++i)
        if (!(cfg.thr_lambda[i] > 0.0) ||
            (i > 0 && !(cfg.thr_lambda[i] > cfg.thr_lambda[i - 1])))
            throw ParamError(
                "config: threshold.lambda positive strictly increasing "
                "violated");

    if (cfg.out_dir.empty())
        throw ParamError("config: output.dir nonempty violated");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParamError("config: cannot open '" + path + "'");
    return parse_config(in);
}

} // namespace nlap
