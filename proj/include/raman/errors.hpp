#pragma once

#include <stdexcept>
#include <string>

namespace raman {

// Parameter outside the physical or mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Regime or quantity for which no closed form is available.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Caller broke an input contract, e.g. a missing optional field.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Series evaluation did not converge at the requested truncation.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Truncation requested beyond what the algorithm supports.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested Fock basis is too large.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Oracle result contaminated by truncation leakage.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace raman
