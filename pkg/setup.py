#
# setup.py
# FocalHessian
#
# Packaging and installation script for the FocalHessian project.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Script de instalacao do pacote FocalHessian."""

from setuptools import setup, find_packages


setup(name='FocalHessian',
        version='1.0.0',
        description='Derivative-free Hessian learning at the optimum with forced covariance adaptation (FOCAL).',
        long_description="See README.md for more details.",
        python_requires='>=3.9',
        license='Apache 2.0',
        packages=find_packages(exclude=["tests"]),
        install_requires=[
            'numpy>=1.22',
            'scipy>=1.8',
            'pandas>=1.5',
            'tqdm>=4.45.0',
            'joblib'
        ],
        extras_require={
            'preview': ['matplotlib'],
            'test': ['pytest'],
        },
        zip_safe=False,
        classifiers=[
            'Intended Audience :: Science/Research',
            'Programming Language :: Python',
            'Topic :: Scientific/Engineering',
            'Operating System :: Unix',
            'Operating System :: MacOS'
        ],
        entry_points={
            'console_scripts': [
                'FocalHessian=focalhessian.bin.FocalHessian:main'
            ],
        },
    )
