#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy. The CLI maps these onto process exit codes:
//   config_error      -> 1  (bad configuration, schema violations, bad ids)
//   infeasible_error  -> 2  (no visibility within the horizon, no feasible slot)
//   deadline_error    -> 3  (a scheduled arrival would miss its global-update time)
// Everything else (domain, protocol, divergence) is a "bad input or internal bug"
// class and also maps to 1 at the CLI boundary.

namespace leofl {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration value, unknown/missing config key, invalid satellite id.
class config_error : public error {
public:
    using error::error;
};

// Numeric argument outside the function's domain (zero distance, negative size, ...).
class domain_error : public error {
public:
    using error::error;
};

// The request cannot be satisfied within the search horizon.
class infeasible_error : public error {
public:
    using error::error;
};

// Internal consistency violation (ring membership, scheduling contradiction, ...).
class protocol_error : public error {
public:
    using error::error;
};

// Training produced a non-finite parameter or loss.
class divergence_error : public error {
public:
    using error::error;
};

// A scheduled-mode arrival landed after the committed global-update time.
class deadline_error : public error {
public:
    using error::error;
};

} // namespace leofl
