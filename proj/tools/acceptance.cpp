// Runs every acceptance criterion and prints one PASS/FAIL line each.

#include <retarget/selfcheck.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>

int main(int argc, char** argv)
{
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20240601;
    int failed = 0;
    for (const auto& r : retarget::selfcheck::run_all(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << std::endl;
        failed += r.passed ? 0 : 1;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " failing criteria" << std::endl;
    return failed ? 1 : 0;
}
