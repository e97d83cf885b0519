#pragma once

#include "qmarginal/consistency.hpp"
#include "qmarginal/fermion.hpp"
#include "qmarginal/gibbs.hpp"
#include "qmarginal/localham.hpp"

#include <map>
#include <optional>
#include <string>

namespace qmarginal {

struct instance_parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// On-disk problem instance.  `kind` selects which payload is populated:
/// consistency | localham | nrep | gibbs | stoquastic.  Matrices are nested
/// arrays of [re, im] pairs; qubit subsets are 1-based index lists.
struct InstanceFile {
    std::string kind;
    std::optional<ConsistencyInstance> consistency;  // consistency and stoquastic
    std::optional<LocalHamInstance> localham;
    std::optional<NRepInstance> nrep;
    std::optional<ObservableSet> gibbs;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::optional<ComplexMatrix> witness;  // optional verification witness
};

InstanceFile parse_instance_text(const std::string& text);
InstanceFile load_instance_file(const std::string& path);
std::string serialize_instance_file(const InstanceFile& inst);
void save_instance_file(const InstanceFile& inst, const std::string& path);

/// Structured result of one CLI command: verdict, residuals, oracle-query
/// counts, and the precision-parameter chain behind the run.
struct RunReport {
    std::string command;
    Verdict verdict = Verdict::UNDECIDED;
    std::map<std::string, double> values;
    std::vector<std::pair<std::string, double>> precision_ledger;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;

    int exit_code() const;
    std::string text() const;
    std::string json_text() const;
};

}  // namespace qmarginal
