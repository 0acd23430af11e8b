#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "wavesep/util/memory.hpp"

int main(int argc, char** argv) {
  wavesep::util::keep_freed_memory();
  return doctest::Context(argc, argv).run();
}
