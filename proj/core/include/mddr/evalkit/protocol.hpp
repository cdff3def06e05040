#pragma once

#include <string>
#include <vector>

namespace mddr::evalkit {

/// Leave-domain-out evaluation families: train on all-but-one (I), on a
/// pair (II), or on a single source domain (III); always test on a domain
/// that was never trained on.
enum class Protocol { I, II, III };

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct ProtocolSpec {
    Protocol protocol = Protocol::II;
    std::vector<std::string> train_domains;
    std::string test_domain;

    void validate() const;

    /// "a+b->c" style label used in result tables.
    std::string name() const;
};

/// All (train, test) assignments of the given protocol over the domain
/// universe. Counts over n domains: n for I, C(n,2)*(n-2) for II,
/// n*(n-1) for III.
std::vector<ProtocolSpec> enumerate_protocols(const std::vector<std::string>& domain_ids,
                                              Protocol protocol);

}  // namespace mddr::evalkit
