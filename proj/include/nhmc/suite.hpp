#pragma once

#include <functional>
#include <vector>

#include "nhmc/chains.hpp"
#include "nhmc/envelopes.hpp"

namespace nhmc {

struct EnvelopeRequest {
    BoundKind kind;
    double q = 0.0;
};

// Assembles the coefficient table at horizon n and returns every envelope
// form for the requested kinds (both Bernstein forms, all three McDiarmid
// forms). f_dim is the output dimension of the separately Lipschitz
// functional. A semi-exponential request whose V_n < 1 guard fails is
// skipped. The default overload derives valid moment constants from the
// model; the provider overload lets callers supply certified constants.
std::vector<BoundEnvelope> build_envelope_suite(const ChainModel& m, long n, int f_dim,
                                                const std::vector<EnvelopeRequest>& reqs);
std::vector<BoundEnvelope> build_envelope_suite(
    const ChainModel& m, long n, int f_dim, const std::vector<EnvelopeRequest>& reqs,
    const std::function<MomentConstants(BoundKind, double)>& constants_for);

}  // namespace nhmc
