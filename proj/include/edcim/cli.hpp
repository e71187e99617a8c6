#pragma once

namespace edcim {

int run_cli(int argc, const char* const* argv);

}  // namespace edcim
