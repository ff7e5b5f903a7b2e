// dynamics.cpp — solver selector names

#include "gapengine/dynamics.hpp"

#include <stdexcept>
#include <string>

namespace gapengine {

const char* to_string(SolverKind s) {
    switch (s) {
    case SolverKind::Heom: return "heom";
    case SolverKind::RedfieldPlus: return "redfield_plus";
    case SolverKind::RedfieldMarkov: return "redfield_markov";
    case SolverKind::BornMarkov: return "born_markov";
    }
    return "unknown";
}

SolverKind solver_from_string(const std::string& s) {
    for (SolverKind k : {SolverKind::Heom, SolverKind::RedfieldPlus, SolverKind::RedfieldMarkov, SolverKind::BornMarkov}) {
        if (s == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown solver '" + s + "' (expected heom, redfield_plus, redfield_markov or born_markov)");
}

void Dynamics::set_state_vector(std::span<const cplx> /*v*/) {
    throw std::logic_error(std::string(to_string(kind())) + ": state replacement is not supported");
}

} // namespace gapengine
