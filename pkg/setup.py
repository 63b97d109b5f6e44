# setup.py
# Install script of the od_dlm package
#
# This software is licensed under the terms of the GNU General Public License
# http://opensource.org/licenses/GPL-3.0
#
#    This program is free software: you can redistribute it and/or
#    modify it under the terms of the GNU General Public License
#    version 3 as published by the Free Software Foundation.
#
#    This program is distributed in the hope that it will be useful,
#    but WITHOUT ANY WARRANTY; without even the implied warranty of
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#    GNU General Public License for more details.
#

import re
from setuptools import setup

with open('od_dlm.py') as f:
    VERSION = re.search(r"^__version__ = '([^']+)'", f.read(), re.M).group(1)

NAME = 'od_dlm'

MODULES = 'od_dlm', 'od_errors', 'od_io', 'network', 'stochastics', 'route_choice', 'dlm_filter', 'gibbs_sampling', 'sampler', 'simulator'


SCRIPTS = 'od_cli.py',

REQUIRES = 'configobj', 'numpy', 'scipy', 'networkx'

DESCRIPTION = 'Bayesian day-to-day OD demand estimation from link counts with a dynamic linear model'

setup(name=NAME,
      version=VERSION,
      description=DESCRIPTION,
      py_modules=MODULES,
      scripts=SCRIPTS,
      packages=['utils'],
      package_data={'utils': ['logging.conf']},
      install_requires=REQUIRES,
      extras_require={'test': ['pytest']},
      python_requires='>=3.8'
     )
