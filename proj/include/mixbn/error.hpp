#ifndef MIXBN_ERROR_HPP
#define MIXBN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mixbn {

// Bad or inconsistent user input: unreadable files, schema mismatches,
// invalid arguments. The CLI maps these to exit status 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An edge operation that would close a directed cycle.
class CycleError : public InputError {
public:
    using InputError::InputError;
};

// A broken internal invariant. The CLI maps these to exit status 2.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mixbn

#endif  // MIXBN_ERROR_HPP
