#include "nhmc/suite.hpp"

namespace nhmc {

std::vector<BoundEnvelope> build_envelope_suite(const ChainModel& m, long n, int f_dim,
                                                const std::vector<EnvelopeRequest>& reqs) {
    return build_envelope_suite(m, n, f_dim, reqs, [&m](BoundKind k, double q) {
        return derive_constants(m, k, q);
    });
}

std::vector<BoundEnvelope> build_envelope_suite(
    const ChainModel& m, long n, int f_dim, const std::vector<EnvelopeRequest>& reqs,
    const std::function<MomentConstants(BoundKind, double)>& constants_for) {
    check(n >= 2, "build_envelope_suite: n must be at least 2");
    auto K = compute_K(m.schedule, n);
    double K1n = K.at(1);
    std::vector<BoundEnvelope> out;
    for (const auto& req : reqs) {
        MomentConstants mc = constants_for(req.kind, req.q);
        const InitialTailSpec& init = mc.init_tail;
        switch (req.kind) {
            case BoundKind::Bernstein: {
                auto bc = constants_bernstein(K, m.schedule, mc);
                out.push_back(bernstein_envelope(bc, f_dim, m.p, K1n, init, BernsteinForm::Refined, n));
                out.push_back(bernstein_envelope(bc, f_dim, m.p, K1n, init, BernsteinForm::Relaxed, n));
                break;
            }
            case BoundKind::SemiExp: {
                auto bc = constants_semiexp(K, m.schedule, mc, req.q);
                if (auto env = semiexp_envelope(bc, f_dim, m.p, K1n, init, n))
                    out.push_back(std::move(*env));
                break;
            }
            case BoundKind::FukNagaev: {
                auto bc = constants_fuk_nagaev(K, m.schedule, mc, req.q);
                out.push_back(fuk_nagaev_envelope(bc, f_dim, m.p, K1n, init, n));
                break;
            }
            case BoundKind::VBE: {
                auto bc = constants_vbe(K, m.schedule, mc, req.q);
                out.push_back(vbe_envelope(bc, f_dim, m.p, K1n, init, n));
                break;
            }
            case BoundKind::WeakMoment: {
                auto bc = constants_weak(K, m.schedule, mc, req.q);
                out.push_back(weak_envelope(bc, f_dim, m.p, K1n, init, n));
                break;
            }
            case BoundKind::McDiarmid: {
                auto bc = constants_mcdiarmid(K, m.schedule, mc);
                for (auto form : {McDiarmidForm::Rio, McDiarmidForm::Product, McDiarmidForm::Gaussian})
                    out.push_back(mcdiarmid_envelope(bc, f_dim, m.p, K1n, init, form, n));
                break;
            }
            case BoundKind::Hoeffding: {
                auto bc = constants_hoeffding(K, m.schedule, mc);
                bc.T = mc.T;
                if (mc.T > 0.0) {
                    out.push_back(hoeffding_envelope(bc, f_dim, m.p, K1n, init, n));
                } else {
                    auto mcopy = std::make_shared<const ChainModel>(m);
                    out.push_back(hoeffding_envelope(
                        bc, f_dim, m.p, K1n, init, n, 0.0,
                        [mcopy](double y) { return g_eps_tail(*mcopy, y); }));
                }
                break;
            }
            default:
                throw std::invalid_argument("build_envelope_suite: moment bounds have no envelope");
        }
    }
    return out;
}

}  // namespace nhmc
