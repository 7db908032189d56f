#include <fragrd/expcli.hpp>

int main(int argc, char** argv)
{
    return fragrd::expcli::run(argc, argv);
}
