#!/usr/bin/env python
# -*- encoding: utf-8 -*-
from setuptools import setup

# See https://blog.ionelmc.ro/2014/06/25/python-packaging-pitfalls/
setup(name='bergman-lab',
      version='0.1.0',
      description='Exact invariants, Bergman projections and L^p estimate experiments for monomial '
                  'polyhedra.',
      keywords='bergman projection monomial polyhedron reinhardt',
      license='LGPLv2.1',
      packages=['bergman_lab', 'bergman_lab.bin', 'bergman_lab.tests'],
      python_requires='>=3.8',
      install_requires=['numpy>=1.17', 'pandas>=1.5', 'path-helpers', 'scipy>=1.6', 'sympy>=1.7'],
      extras_require={'tests': ['pytest', 'hypothesis'],
                      'docs': ['numpydoc', 'sphinx', 'sphinx_rtd_theme']},
      entry_points={'console_scripts': ['bergman-lab = bergman_lab.bin.lab:main']},
      # Install data listed in `MANIFEST.in`
      include_package_data=True)
