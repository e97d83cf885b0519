#include "qmarginal/instance_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace qmarginal {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw instance_parse_error("instance file, field '" + where + "': " + what);
}

ComplexMatrix parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
    const size_t rows = j.size();
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != rows)
            fail(where, "row " + std::to_string(r) + " is not length " + std::to_string(rows));
        for (size_t c = 0; c < rows; ++c) {
            const json& cell = row[c];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number())
                fail(where, "entry (" + std::to_string(r) + "," + std::to_string(c) +
                                ") must be an [re, im] pair");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        fail(where, "matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    return m;
}

json dump_matrix(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<int> parse_subset(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty index list");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) fail(where, "subset entries must be integers");
        out.push_back(v.get<int>());
    }
    return out;
}

std::vector<SubsetMarginal> parse_marginals(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array");
    std::vector<SubsetMarginal> out;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (!e.contains("subset")) fail(at, "missing 'subset'");
        if (!e.contains("matrix")) fail(at, "missing 'matrix'");
        SubsetMarginal mg;
        mg.subset = parse_subset(e["subset"], at + ".subset");
        mg.rho = HermitianOp(parse_matrix(e["matrix"], at + ".matrix"), 1e-10);
        out.push_back(std::move(mg));
    }
    return out;
}

double get_number(const json& j, const std::string& key, std::optional<double> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        fail(key, "missing required number");
    }
    if (!j[key].is_number()) fail(key, "expected a number");
    return j[key].get<double>();
}

int get_int(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number_integer()) fail(key, "expected an integer");
    return j[key].get<int>();
}

}  // namespace

InstanceFile parse_instance_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw instance_parse_error(std::string("instance file: invalid JSON: ") + e.what());
    }
    if (!j.contains("kind") || !j["kind"].is_string()) fail("kind", "missing or not a string");

    InstanceFile out;
    out.kind = j["kind"].get<std::string>();
    out.tol = get_number(j, "tol", 1e-6);
    if (j.contains("seed")) out.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("witness")) out.witness = parse_matrix(j["witness"], "witness");

    if (out.kind == "consistency" || out.kind == "stoquastic") {
        ConsistencyInstance inst;
        inst.n = get_int(j, "n");
        inst.beta = get_number(j, "beta");
        inst.marginals = parse_marginals(j.contains("marginals") ? j["marginals"] : json(),
                                         "marginals");
        inst.max_subset_size = kMaxQubits;
        inst.validate();
        out.consistency = std::move(inst);
    } else if (out.kind == "localham") {
        LocalHamInstance inst;
        inst.n = get_int(j, "n");
        inst.a = get_number(j, "a");
        inst.b = get_number(j, "b");
        if (!j.contains("terms")) fail("terms", "missing");
        for (size_t i = 0; i < j["terms"].size(); ++i) {
            const json& e = j["terms"][i];
            const std::string at = "terms[" + std::to_string(i) + "]";
            LocalHamTerm t;
            t.subset = parse_subset(e.contains("subset") ? e["subset"] : json(), at + ".subset");
            t.op = HermitianOp(parse_matrix(e.contains("matrix") ? e["matrix"] : json(),
                                            at + ".matrix"),
                               1e-10);
            inst.terms.push_back(std::move(t));
        }
        inst.validate();
        out.localham = std::move(inst);
    } else if (out.kind == "nrep") {
        NRepInstance inst;
        inst.modes = get_int(j, "M");
        inst.particles = get_int(j, "N");
        inst.beta = get_number(j, "beta");
        inst.rho.modes = inst.modes;
        inst.rho.mat = parse_matrix(j.contains("matrix") ? j["matrix"] : json(), "matrix");
        const Eigen::Index dp = static_cast<Eigen::Index>(pair_basis(inst.modes).size());
        if (inst.rho.mat.rows() != dp)
            fail("matrix", "expected pair-basis dimension " + std::to_string(dp));
        out.nrep = std::move(inst);
    } else if (out.kind == "gibbs") {
        ObservableSet obs;
        if (!j.contains("observables")) fail("observables", "missing");
        std::vector<double> targets;
        for (size_t i = 0; i < j["observables"].size(); ++i) {
            const json& e = j["observables"][i];
            const std::string at = "observables[" + std::to_string(i) + "]";
            obs.observables.emplace_back(
                parse_matrix(e.contains("matrix") ? e["matrix"] : json(), at + ".matrix"), 1e-10);
            if (!e.contains("target") || !e["target"].is_number())
                fail(at + ".target", "expected a number");
            targets.push_back(e["target"].get<double>());
        }
        obs.targets = Eigen::Map<RealVector>(targets.data(), static_cast<Eigen::Index>(targets.size()));
        obs.validate();
        out.gibbs = std::move(obs);
    } else {
        fail("kind", "unknown kind '" + out.kind + "'");
    }
    return out;
}

InstanceFile load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw instance_parse_error("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance_text(ss.str());
}

std::string serialize_instance_file(const InstanceFile& inst) {
    json j;
    j["kind"] = inst.kind;
    j["tol"] = inst.tol;
    j["seed"] = inst.seed;
    if (inst.witness) j["witness"] = dump_matrix(*inst.witness);
    if (inst.consistency) {
        j["n"] = inst.consistency->n;
        j["beta"] = inst.consistency->beta;
        json ms = json::array();
        for (const auto& mg : inst.consistency->marginals) {
            json e;
            e["subset"] = mg.subset;
            e["matrix"] = dump_matrix(mg.rho.matrix());
            ms.push_back(std::move(e));
        }
        j["marginals"] = std::move(ms);
    }
    if (inst.localham) {
        j["n"] = inst.localham->n;
        j["a"] = inst.localham->a;
        j["b"] = inst.localham->b;
        json ts = json::array();
        for (const auto& t : inst.localham->terms) {
            json e;
            e["subset"] = t.subset;
            e["matrix"] = dump_matrix(t.op.matrix());
            ts.push_back(std::move(e));
        }
        j["terms"] = std::move(ts);
    }
    if (inst.nrep) {
        j["M"] = inst.nrep->modes;
        j["N"] = inst.nrep->particles;
        j["beta"] = inst.nrep->beta;
        j["matrix"] = dump_matrix(inst.nrep->rho.mat);
    }
    if (inst.gibbs) {
        json obs = json::array();
        for (int i = 0; i < inst.gibbs->size(); ++i) {
            json e;
            e["matrix"] = dump_matrix(inst.gibbs->observables[size_t(i)].matrix());
            e["target"] = inst.gibbs->targets(i);
            obs.push_back(std::move(e));
        }
        j["observables"] = std::move(obs);
    }
    return j.dump(2);
}

void save_instance_file(const InstanceFile& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << serialize_instance_file(inst) << "\n";
}

int RunReport::exit_code() const {
    switch (verdict) {
        case Verdict::YES: return 0;
        case Verdict::NO: return 1;
        default: return 2;
    }
}

std::string RunReport::text() const {
    std::ostringstream os;
    os << command << ": verdict " << to_string(verdict) << "\n";
    for (const auto& [k, v] : values) os << "  " << k << " = " << v << "\n";
    if (!precision_ledger.empty()) {
        os << "  precision chain:\n";
        for (const auto& [k, v] : precision_ledger) os << "    " << k << " = " << v << "\n";
    }
    os << "  wall_seconds = " << wall_seconds << "\n";
    os << "  seed = " << seed << "\n";
    return os.str();
}

std::string RunReport::json_text() const {
    json j;
    j["command"] = command;
    j["verdict"] = to_string(verdict);
    j["exit_code"] = exit_code();
    for (const auto& [k, v] : values) j["values"][k] = v;
    json chain = json::array();
    for (const auto& [k, v] : precision_ledger) {
        json e;
        e["name"] = k;
        e["value"] = v;
        chain.push_back(std::move(e));
    }
    j["precision_chain"] = std::move(chain);
    j["wall_seconds"] = wall_seconds;
    j["seed"] = seed;
    return j.dump(2);
}

}  // namespace qmarginal
