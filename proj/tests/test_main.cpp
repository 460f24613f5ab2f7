#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <iostream>

#include "fedsched/bandwidth.hpp"

// After all cases have run, every smoothed-objective evaluation made by the
// suite must have stayed inside 0 <= LSE - max <= ln(m).
int main(int argc, char** argv) {
    doctest::Context context(argc, argv);
    const int status = context.run();
    if (context.shouldExit()) return status;
    const auto audit = fedsched::lse_audit();
    std::cout << "lse audit: " << audit.evaluations << " evaluations, " << audit.violations
              << " violations\n";
    return status != 0 ? status : (audit.violations == 0 ? 0 : 1);
}
