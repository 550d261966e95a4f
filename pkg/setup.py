import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = Path(__file__).resolve().parent


class CargoExtension(Extension):
    """Extension whose sources are a cargo crate producing a cdylib."""

    def __init__(self, name: str, crate_dir: str):
        super().__init__(name, sources=[])
        self.crate_dir = ROOT / crate_dir


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        if not isinstance(ext, CargoExtension):
            return super().build_extension(ext)
        subprocess.run(["cargo", "build", "--release"], cwd=ext.crate_dir, check=True)
        libname = "libblsops.dylib" if sys.platform == "darwin" else "libblsops.so"
        built = ext.crate_dir / "target" / "release" / libname
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[CargoExtension("quorumlight._blsops", "rust/blsops")],
    cmdclass={"build_ext": CargoBuildExt},
)
